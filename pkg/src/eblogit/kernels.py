"""Backend selection for the hot coordinate-update kernels.

The compiled extension is used when importable; otherwise the pure-numpy
twin takes over.  Set EBLOGIT_KERNELS=python to force the fallback, or call
set_backend() at runtime (used by the kernel benchmark and the equivalence
tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

if os.environ.get("EBLOGIT_KERNELS") == "python" or _compiled is None:
    _active = _kernels_py
else:
    _active = _compiled


def backend_name() -> str:
    return _active.BACKEND


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def set_backend(name: str) -> None:
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None


def get_backend(name: str | None = None):
    """Return a kernel namespace without changing the active one."""
    if name is None:
        return _active
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; available: {available_backends()}") from None


def cavi_sweep(x, yc_x, bt, u, m, phi, omega, alpha, pen):
    return _active.cavi_sweep(x, yc_x, bt, u, m, phi, omega, alpha, pen)


def lasso_cd(x, wn, r, beta, hjj, lam, pf, skip, tol, max_sweeps):
    return _active.lasso_cd(x, wn, r, beta, hjj, lam, pf, skip, tol, max_sweeps)
