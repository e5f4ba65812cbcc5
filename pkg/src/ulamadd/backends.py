"""Kernel backend selection.

The hot simulation loops exist twice: a compiled Cython extension
(``ulamadd._kernels``) and a pure-Python/numpy fallback
(``ulamadd._kernels_py``).  Both expose the same functions and, because all
randomness flows through per-trajectory Philox streams consumed in a fixed
draw order, they produce bit-identical trajectories.  The compiled module is
preferred when the import succeeds; tests and benchmarks can force a lane
with ``use_backend``.
"""

from __future__ import annotations

from . import _kernels_py

try:  # compiled extension is optional
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build environment
    _compiled = None

_forced = None  # test/bench override


def kernels():
    """Return the active kernel module."""
    if _forced is not None:
        return _forced
    return _compiled if _compiled is not None else _kernels_py


def active_backend() -> str:
    return "compiled" if kernels() is not _kernels_py else "python"


def available_backends() -> tuple[str, ...]:
    return ("compiled", "python") if _compiled is not None else ("python",)


class use_backend:
    """Context manager forcing a backend by name ('compiled' or 'python')."""

    def __init__(self, name: str):
        if name == "python":
            self.module = _kernels_py
        elif name == "compiled":
            if _compiled is None:
                raise RuntimeError("compiled kernels are not available")
            self.module = _compiled
        else:
            raise ValueError(f"unknown backend {name!r}")

    def __enter__(self):
        global _forced
        self._saved = _forced
        _forced = self.module
        return self.module

    def __exit__(self, *exc):
        global _forced
        _forced = self._saved
        return False
