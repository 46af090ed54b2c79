"""corona-lab: numerical corona solutions on complements of square Cantor sets."""

from .config import CantorConfig, load_config
from .geometry.tree import CantorTree, build_tree

__version__ = "0.1.0"

__all__ = ["CantorConfig", "load_config", "CantorTree", "build_tree", "__version__"]
