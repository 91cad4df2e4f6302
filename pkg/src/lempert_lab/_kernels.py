"""Hot loops: defining-function margins and polynomial disc evaluation.

Each kernel exists twice, as an explicit loop (compiled with numba when it is
available) and as a vectorized numpy expression.  Set the environment variable
``LEMPERT_LAB_DISABLE_NUMBA=1`` before import to force the numpy versions.
Both versions return identical results up to floating-point reassociation.
"""

from __future__ import annotations

import os

import numpy as np

# variant codes for g_margins
PLAIN, TILDE, MINUS = 0, 1, 2

_DISABLED = os.environ.get("LEMPERT_LAB_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit
except ImportError:  # pragma: no cover - depends on environment
    njit = None

USING_NUMBA = njit is not None


def _g_margins_loop(z1, zr, mu, mode):
    n = z1.shape[0]
    k = zr.shape[1]
    out = np.empty(n)
    for i in range(n):
        a = z1[i]
        m = abs(a) - 1.0
        s = 0.0
        for j in range(k):
            r = abs(zr[i, j])
            if r - 1.0 > m:
                m = r - 1.0
            s += r ** mu
        if mode == 1:
            s += abs(a.imag) ** mu
        elif mode == 2:
            s -= abs(a.imag)
        d = a.real - s
        if d > m:
            m = d
        out[i] = m
    return out


def g_margins_numpy(z1, zr, mu, mode):
    z1 = np.asarray(z1, dtype=complex)
    zr = np.asarray(zr, dtype=complex).reshape(z1.shape[0], -1)
    az = np.abs(zr)
    s = np.sum(az**mu, axis=1)
    if mode == TILDE:
        s = s + np.abs(z1.imag) ** mu
    elif mode == MINUS:
        s = s - np.abs(z1.imag)
    m = np.maximum(np.abs(z1) - 1.0, z1.real - s)
    if az.shape[1]:
        m = np.maximum(m, az.max(axis=1) - 1.0)
    return m


def _poly_eval_loop(coeffs, zeta):
    n, d1 = coeffs.shape
    npts = zeta.shape[0]
    out = np.empty((npts, n), dtype=np.complex128)
    for i in range(npts):
        x = zeta[i]
        for j in range(n):
            acc = coeffs[j, d1 - 1]
            for k in range(d1 - 2, -1, -1):
                acc = acc * x + coeffs[j, k]
            out[i, j] = acc
    return out


def poly_eval_numpy(coeffs, zeta):
    coeffs = np.asarray(coeffs, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    V = zeta[:, None] ** np.arange(coeffs.shape[1])[None, :]
    return V @ coeffs.T


if USING_NUMBA:
    _g_jit = njit(cache=True)(_g_margins_loop)
    _poly_jit = njit(cache=True)(_poly_eval_loop)

    def g_margins_jit(z1, zr, mu, mode):
        z1 = np.ascontiguousarray(z1, dtype=np.complex128)
        zr = np.ascontiguousarray(np.asarray(zr, dtype=np.complex128).reshape(z1.shape[0], -1))
        return _g_jit(z1, zr, float(mu), int(mode))

    def poly_eval_jit(coeffs, zeta):
        return _poly_jit(np.ascontiguousarray(coeffs, dtype=np.complex128),
                         np.ascontiguousarray(zeta, dtype=np.complex128))

    g_margins = g_margins_jit
    poly_eval = poly_eval_jit
else:
    g_margins_jit = None
    poly_eval_jit = None
    g_margins = g_margins_numpy
    poly_eval = poly_eval_numpy


def backend() -> str:
    return "numba" if USING_NUMBA else "numpy"

