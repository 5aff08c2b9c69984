"""Sets up the brepmesh package, test dependencies, and command line scripts"""

from setuptools import find_packages, setup

# .. Dependency lists .........................................................

INSTALL_DEPS = [
    "numpy",
    "scipy",
    "ruamel.yaml",
    "coloredlogs",
    "click",
    "pydantic >= 2.0",
    "yayaml>=0.2",
    "dantro>=0.20.1",
]
# NOTE When adding a new dependency, make sure to denote it in the isort
#      configuration, see pyproject.toml.

# Dependencies for running tests and general development of brepmesh
TEST_DEPS = [
    "pytest",
    "pytest-cov",
]


# .. Description ..............................................................

DESCRIPTION = "Topology-preserving meshing of boundary representations"
LONG_DESCRIPTION = """
``brepmesh``: Topology-preserving meshing of boundary representations
=====================================================================

The ``brepmesh`` package converts boundary representations (B-Reps) into
triangle meshes whose topology matches that of the B-Rep **exactly**, no
matter how inconsistent the geometry of the B-Rep is or how large the chosen
geometric tolerance is.

- Every triangle, mesh edge and mesh vertex is **labeled** with the b-face,
  b-edge or b-vertex it represents.
- The single geometric tolerance only controls the **accuracy** of the mesh;
  it never changes its topology.
- A five-stage pipeline: sampling of curves and surface patches, snapping,
  loop embedding by constrained shortest paths, stitching and isotropic
  remeshing that preserves both geometry and topology.
- Optional **heuristics** speed up the embedding; each is validated with
  purely topological checks and replaced by the base algorithm if it fails.
- An independent **topology checker** and a sampled deviation measure.
- A human-readable B-Rep interchange format, a suite of synthetic B-Reps and
  a command line interface for meshing, validation and inspection.
"""


# .............................................................................


def find_version(*file_paths) -> str:
    """Tries to extract a version from the given path sequence"""
    import codecs
    import os
    import re

    def read(*parts):
        """Reads a file from the given path sequence, relative to this file"""
        here = os.path.abspath(os.path.dirname(__file__))
        with codecs.open(os.path.join(here, *parts), "r") as fp:
            return fp.read()

    # Read the file and match the __version__ string
    file = read(*file_paths)
    match = re.search(r"^__version__\s?=\s?['\"]([^'\"]*)['\"]", file, re.M)
    if match:
        return match.group(1)
    raise RuntimeError("Unable to find version string in " + str(file_paths))


# .............................................................................


setup(
    name="brepmesh",
    #
    # Package information
    version=find_version("brepmesh", "__init__.py"),
    #
    description=DESCRIPTION,
    long_description=LONG_DESCRIPTION,
    author="brepmesh developers",
    classifiers=[
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
        #
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Developers",
        "Intended Audience :: Science/Research",
        #
        "Topic :: Scientific/Engineering :: Mathematics",
        "Topic :: Multimedia :: Graphics :: 3D Modeling",
    ],
    #
    # Package content
    packages=find_packages(exclude=("tests",)),
    package_data=dict(brepmesh=["cfg/*.yml"]),
    data_files=[
        ("", ["README.md", "CHANGELOG.md"]),
    ],
    #
    # Dependencies
    install_requires=INSTALL_DEPS,
    extras_require=dict(
        test=TEST_DEPS,
        dev=TEST_DEPS,
    ),
    #
    # Command line scripts
    entry_points={
        "console_scripts": [
            "brepmesh = brepmesh_cli.cli:cli",
        ],
    },
)
