"""VPR integrity monitoring: match verification and verified localization."""

try:
    from ._vprmon import *  # noqa: F401,F403  (installed package layout)
    from . import _vprmon as _core
except ImportError:  # pragma: no cover - build-tree layout used by ctest
    from _vprmon import *  # noqa: F401,F403
    import _vprmon as _core

__version__ = "0.1.0"
__all__ = [name for name in dir(_core) if not name.startswith("_")]
