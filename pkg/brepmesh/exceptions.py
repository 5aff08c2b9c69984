"""brepmesh-specific exception types"""

from typing import Optional


class BRepMeshException(BaseException):
    """Base class for brepmesh-specific exceptions"""


class ConfigError(BRepMeshException, ValueError):
    """Raised upon failure to validate a pipeline configuration"""


# -- Input documents ----------------------------------------------------------


class ParseError(BRepMeshException, ValueError):
    """Raised when an input document cannot be read. Carries the line number
    and the field path (if known) of the offending entry."""

    def __init__(
        self,
        msg: str,
        *,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.msg = msg
        self.line = line
        self.field = field
        super().__init__(msg)

    def __str__(self) -> str:
        where = []
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.field:
            where.append(f"field '{self.field}'")
        if not where:
            return self.msg
        return f"{self.msg} ({', '.join(where)})"


class SchemaError(ParseError):
    """Raised if a document is syntactically fine but violates the schema"""


class UnknownVariantError(SchemaError):
    """Raised for curve or surface type tags that are not known"""


class VersionMismatchError(ParseError):
    """Raised if the document's format version is not supported"""


class LabelResolutionError(BRepMeshException, ValueError):
    """Raised if labels of a mesh do not resolve against a B-Rep"""


# -- Geometry -----------------------------------------------------------------


class GeometryError(BRepMeshException, ValueError):
    """Raised when constructing an invalid curve or surface primitive"""


# -- Mesh operations ----------------------------------------------------------


class MeshOperationError(BRepMeshException, ValueError):
    """Raised when a local mesh operation is not admissible"""


class FeatureEdgeError(MeshOperationError):
    """Raised when trying to flip an edge that carries a b-edge label"""


class FrozenVertexError(MeshOperationError):
    """Raised when trying to remove a b-vertex-labeled mesh vertex"""


class LinkConditionError(MeshOperationError):
    """Raised if an edge collapse would violate the link condition or
    cross distinct features"""


class DegenerateTriangleError(MeshOperationError):
    """Raised when splitting a triangle with (numerically) zero area"""


class ChainError(MeshOperationError):
    """Raised for edge chains that are not simple or reference missing
    edges"""


# -- Pipeline stages ----------------------------------------------------------


class EmbeddingError(BRepMeshException, RuntimeError):
    """Raised if loop embedding hits a state that should be impossible"""


class HeuristicRejected(BRepMeshException):
    """Signals that a heuristic failed its topological validation; the
    caller reverts to the base algorithm"""


class LongTraceError(HeuristicRejected):
    """Signals that a traced chain got much longer than its curve"""

    def __init__(self, bedge: int, chain_length: float, curve_length: float):
        self.bedge = bedge
        self.chain_length = chain_length
        self.curve_length = curve_length
        super().__init__(
            f"Chain of b-edge {bedge} has length {chain_length:.4g}, "
            f"the curve only {curve_length:.4g}"
        )


class StitchingError(BRepMeshException, RuntimeError):
    """Raised if face meshes cannot be merged consistently"""


class ResourceLimitError(BRepMeshException, RuntimeError):
    """Raised if a resource limit (triangle count, time budget) is exceeded.
    Names the b-face that was being processed, if any."""

    def __init__(self, msg: str, *, face: Optional[int] = None):
        self.face = face
        if face is not None:
            msg = f"{msg} (b-face {face})"
        super().__init__(msg)
