"""Embedding b-loops onto patch meshes as labeled edge cycles"""

from .face import FaceEmbedding, embed_face, restore_disk
from .heuristics import HeuristicStats
from .loops import (
    MergeMap,
    preprocess_nonmanifold,
    shared_loops,
    snap_curve_endpoints,
)
from .trace import (
    KEEP_COMPLEMENT,
    KEEP_DISK,
    TraceState,
    embed_loop,
    project_onto_mesh,
    shortest_path,
    trace_segment,
)
