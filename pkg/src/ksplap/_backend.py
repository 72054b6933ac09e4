"""Kernel backend selection.

``KSPLAP_BACKEND`` may be ``auto`` (default), ``cython`` or ``python``.
"""
import importlib
import os

from . import _pykernels

_ENV = "KSPLAP_BACKEND"


def available():
    names = ["python"]
    try:
        importlib.import_module("ksplap._ckernels")
    except ImportError:
        pass
    else:
        names.insert(0, "cython")
    return names


def get_kernels(name=None):
    name = (name or os.environ.get(_ENV, "auto")).lower()
    if name == "python":
        return _pykernels
    if name in ("auto", "cython"):
        try:
            return importlib.import_module("ksplap._ckernels")
        except ImportError:
            if name == "cython":
                raise
            return _pykernels
    raise ValueError(f"{_ENV}: unknown backend {name!r}")


kernels = get_kernels()
BACKEND = kernels.NAME
