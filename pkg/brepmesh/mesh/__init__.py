"""The labeled triangle mesh and the operations on it"""

from .chains import chain_params, label_chains
from .cutting import (
    ComponentInfo,
    CutResult,
    EdgeChain,
    component_analysis,
    component_boundary,
    cut_along_chain,
    cut_along_edges,
    is_disk,
    keep_triangles,
    weld,
)
from .locator import TriangleLocator
from .quality import quality_report, triangle_quality
from .simplicial import enforce_simplicial_embedding
from .trimesh import LabeledTriMesh, ekey
