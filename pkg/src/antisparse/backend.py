"""Kernel backend selection.

The hot sampling loops live in ``_kernels.py``, written once in a form that
numba can compile. ``get_kernels`` returns a module instance whose functions
are either ``@njit``-compiled ("numba") or the same source run uncompiled
("numpy"). The active default is controlled by the ``ANTISPARSE_BACKEND``
environment variable: ``auto`` (default), ``numba`` or ``numpy``.
"""

from __future__ import annotations

import importlib.util
import os
import sys
from pathlib import Path

ENV_FLAG = "ANTISPARSE_BACKEND"
_KERNEL_SOURCE = Path(__file__).with_name("_kernels.py")
_VALID = ("numba", "numpy")


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def default_backend() -> str:
    """Resolve the backend name from ANTISPARSE_BACKEND (auto/numba/numpy)."""
    flag = os.environ.get(ENV_FLAG, "auto").strip().lower()
    if flag in ("", "auto"):
        return "numba" if numba_available() else "numpy"
    if flag not in _VALID:
        raise ValueError(f"unknown backend {flag!r}; expected auto, numba or numpy")
    if flag == "numba" and not numba_available():
        raise RuntimeError("ANTISPARSE_BACKEND=numba but numba is not importable")
    return flag


def get_kernels(backend: str | None = None):
    """Return the kernels module for ``backend`` (default: resolved from env).

    Both flavors can coexist in one process; each is loaded at most once.
    """
    name = backend or default_backend()
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}; expected numba or numpy")
    if name == "numba" and not numba_available():
        raise RuntimeError("numba backend requested but numba is not importable")
    modname = f"antisparse._kernels_{name}"
    mod = sys.modules.get(modname)
    if mod is not None:
        return mod
    prev = os.environ.get("_ANTISPARSE_KERNELS_JIT")
    os.environ["_ANTISPARSE_KERNELS_JIT"] = "1" if name == "numba" else "0"
    try:
        spec = importlib.util.spec_from_file_location(modname, _KERNEL_SOURCE)
        mod = importlib.util.module_from_spec(spec)
        sys.modules[modname] = mod
        try:
            spec.loader.exec_module(mod)
        except BaseException:
            sys.modules.pop(modname, None)
            raise
    finally:
        if prev is None:
            os.environ.pop("_ANTISPARSE_KERNELS_JIT", None)
        else:
            os.environ["_ANTISPARSE_KERNELS_JIT"] = prev
    return mod


def warm_up(backend: str | None = None) -> None:
    """Force-compile the chain kernels so later timings exclude JIT cost."""
    import numpy as np

    k = get_kernels(backend)
    x0 = np.array([0.3, -0.2, 0.1])
    k.prox_linf_kernel(x0, 0.5)
    k.gibbs_prior_chain_kernel(2.0, 3, x0, 1, 0)
    k.pmala_prior_chain_kernel(2.0, 3, 2, 0.5, x0, 1, 0.5)
    h = np.array([[0.6, -0.8, 0.1], [0.8, 0.6, -0.3]])
    ht = np.ascontiguousarray(h.T)
    y = np.array([0.1, -0.4])
    k.posterior_chain_kernel(h, ht, y, 1e-3, 1e-3, 3, 2, 0, 1, 0.5, x0, 1, 1e-12, 0, 0.5)
    k.posterior_chain_kernel(h, ht, y, 1e-3, 1e-3, 3, 2, 1, 2, 0.5, x0, 1, 1e-12, 0, 0.5)
    k.geweke_chain_kernel(h, ht, 0.25, 2.0, 3, 0, 1, 0.5, x0, 1)
    k.geweke_chain_kernel(h, ht, 0.25, 2.0, 3, 1, 2, 0.5, x0, 1)
    k.geweke_tune_step(h, ht, 0.25, 2.0, 3, 2, 0.5, x0, 1, 0.5)
