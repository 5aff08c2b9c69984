"""Reading and writing B-Rep interchange documents and labeled meshes"""

from .brep_txt import (
    FORMAT_NAME,
    FORMAT_VERSION,
    BRepDocument,
    document_from_dict,
    dumps_brep,
    read_brep,
    write_brep,
)
from .labeled_mesh import (
    label_counts,
    read_labeled_mesh,
    sidecar_path,
    write_labeled_mesh,
)
