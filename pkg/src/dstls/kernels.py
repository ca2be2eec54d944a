"""Backend selection for the hot loops.

The compiled extension ``dstls._ckernels`` is used when it was built;
otherwise the numpy/pure-Python versions in ``dstls._pykernels`` run.
Set ``DSTLS_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

_BACKENDS = {"python": _pykernels}
try:
    from . import _ckernels

    _BACKENDS["cython"] = _ckernels
except ImportError:  # extension not built
    _ckernels = None

JACOBI_TOL = 1e-15
JACOBI_MAX_SWEEPS = 60


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _default_backend():
    want = os.environ.get("DSTLS_BACKEND", "").strip().lower()
    if want:
        if want not in _BACKENDS:
            raise ImportError(f"DSTLS_BACKEND={want!r} is not available; have {available_backends()}")
        return _BACKENDS[want]
    return _BACKENDS.get("cython", _pykernels)


_active = _default_backend()


def backend_name() -> str:
    return _active.NAME


def set_backend(name: str) -> str:
    """Switch backends; returns the previous backend's name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown backend {name!r}; have {available_backends()}")
    prev = _active.NAME
    _active = _BACKENDS[name]
    return prev


def get_backend(name: str):
    return _BACKENDS[name]


def chain_begins(is_tube, cmin, cmax, runs, e, lo_bound):
    return _active.chain_begins(is_tube, cmin, cmax, runs, int(e), int(lo_bound))


def arx_overpotential(theta, current):
    theta = np.ascontiguousarray(theta, dtype=float)
    current = np.ascontiguousarray(current, dtype=float)
    return _active.arx_overpotential(theta, current)


def rls_filter(vbar, current, lam, theta0, p0):
    vbar = np.ascontiguousarray(vbar, dtype=float)
    current = np.ascontiguousarray(current, dtype=float)
    return _active.rls_filter(vbar, current, float(lam), np.asarray(theta0, float), np.asarray(p0, float))


def jacobi_rotate(a):
    """Orthogonalise the columns of a copy of ``a``; returns ``(a_rot, v, sweeps)``."""
    work = np.array(a, dtype=float, order="C")
    v, sweeps = _active.jacobi_rotate(work, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    return work, np.asarray(v), sweeps
