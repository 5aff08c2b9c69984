"""Supplies the YAML interface, inherited from :py:mod:`yayaml`, and a
round-trip loader that keeps line information for error reporting"""

from ruamel.yaml import YAML
from yayaml import load_yml, write_yml, yaml

# Set the flow style
yaml.default_flow_style = False

yaml_rt = YAML(typ="rt")
"""Round-trip loader; its mappings and sequences carry line numbers which
are used to point at the offending field of an input document"""

yaml_rt.default_flow_style = False
yaml_rt.width = 4096
