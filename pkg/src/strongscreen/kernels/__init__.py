"""Kernel backend selection.

The compiled extension is used when it imported cleanly; the pure-NumPy
twins are the fallback.  Set the environment variable
``STRONGSCREEN_PURE_PYTHON=1`` (before import) or call :func:`set_backend`
to force the fallback, e.g. for benchmarking one against the other.
"""

import os

from . import py_cd

_BACKENDS = {"python": py_cd}

try:
    from . import _cd

    _BACKENDS["compiled"] = _cd
except ImportError:  # extension not built; fall back silently
    _cd = None

if os.environ.get("STRONGSCREEN_PURE_PYTHON"):
    _active_name = "python"
else:
    _active_name = "compiled" if "compiled" in _BACKENDS else "python"


def available_backends():
    return sorted(_BACKENDS)

def backend_name():
    return _active_name


def set_backend(name):
    """Switch the active kernel backend ("compiled" or "python")."""
    global _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    _active_name = name


def active():
    """Module providing the currently selected kernel functions."""
    return _BACKENDS[_active_name]


def get(name=None):
    return _BACKENDS[name or _active_name]
