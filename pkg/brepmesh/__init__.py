"""The :py:mod:`brepmesh` package turns boundary representations into
triangle meshes with exactly the same topology.

.. default-domain:: brepmesh

- B-Rep entities, their geometry and validation (:py:mod:`.brep`,
  :py:mod:`.geometry`)
- A labeled triangle mesh with local operations (:py:mod:`.mesh`)
- The meshing stages: :py:mod:`.sampling`, :py:mod:`.embedding`,
  :py:mod:`.stitching` and :py:mod:`.remeshing`, orchestrated by
  :py:func:`~.pipeline.run_pipeline`
- Verification of the output (:py:mod:`.validation`)
- Interchange and output formats (:py:mod:`.formats`) and a suite of
  synthetic B-Reps (:py:mod:`.fixtures`)

The command line interface lives in the :py:mod:`brepmesh_cli` package.
"""

# Set up logging (needs to happen first), then make the most important parts of
# the brepmesh interface available

from ._logging import _DEFAULT_LOG_LEVEL, _getLogger
from .brep import BRep, BRepTopology, GeometryMap, validate_brep
from .cfg import PipelineConfig, get_pipeline_config
from .formats import (
    BRepDocument,
    read_brep,
    read_labeled_mesh,
    write_brep,
    write_labeled_mesh,
)
from .mesh import LabeledTriMesh
from .pipeline import PipelineResult, run_pipeline
from .validation import check_topology, measure_deviation

__version__ = "0.1.0"
"""The :py:mod:`brepmesh` package version"""
