"""Hot inner loops for the outcome enumeration.

The expected-information sum iterates over every per-period outcome
configuration of a cluster, which is the only runtime-dominant loop in the
package. Two interchangeable implementations are provided: a numba
``@njit`` kernel and a chunked pure-numpy fallback. Set ``SWDPWR_NO_NUMBA=1``
to force the numpy path; it is also used automatically when numba is not
installed. Both iterate configurations in the same row-major order so
results are reproducible; across backends they agree to float rounding.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


USE_NUMBA = HAVE_NUMBA and os.environ.get("SWDPWR_NO_NUMBA", "") not in ("1", "true", "yes")

# numpy path: configurations processed per chunk to bound memory.
CHUNK = 131072


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


@njit(cache=True)
def _accumulate_loop(T, S, sizes, w, dbdt, coef, include_tau, start, stop):  # pragma: no cover
    G, M, _ = T.shape
    nfix = coef.shape[0]
    p = nfix + 1 if include_tau else nfix
    info = np.zeros((p, p))
    svec = np.zeros(p)
    psum = 0.0
    y = np.empty(G, np.int64)
    L = np.empty(M)
    u = np.empty(p)
    for n in range(start, stop):
        rem = n
        for g in range(G - 1, -1, -1):
            y[g] = rem % sizes[g]
            rem //= sizes[g]
        mx = -1.0e300
        for m in range(M):
            acc = 0.0
            for g in range(G):
                acc += T[g, m, y[g]]
            L[m] = acc
            if acc > mx:
                mx = acc
        den = 0.0
        for c in range(p):
            u[c] = 0.0
        for m in range(M):
            e = w[m] * math.exp(L[m] - mx)
            den += e
            stot = 0.0
            for g in range(G):
                sv = S[g, m, y[g]]
                stot += sv
                for c in range(nfix):
                    u[c] += e * coef[c, g] * sv
            if include_tau:
                u[nfix] += e * dbdt[m] * stot
        P = math.exp(mx) * den
        psum += P
        for c in range(p):
            sc = u[c] / den
            u[c] = sc
            svec[c] += P * sc
        for c in range(p):
            for d in range(p):
                info[c, d] += P * u[c] * u[d]
    return psum, svec, info


def _accumulate_numpy(T, S, sizes, w, dbdt, coef, include_tau, start, stop):
    G, M, _ = T.shape
    nfix = coef.shape[0]
    p = nfix + 1 if include_tau else nfix
    info = np.zeros((p, p))
    svec = np.zeros(p)
    psum = 0.0
    strides = np.ones(G, dtype=np.int64)
    for g in range(G - 2, -1, -1):
        strides[g] = strides[g + 1] * sizes[g + 1]
    for lo in range(start, stop, CHUNK):
        idx = np.arange(lo, min(lo + CHUNK, stop), dtype=np.int64)
        Y = [(idx // strides[g]) % sizes[g] for g in range(G)]
        L = T[0][:, Y[0]].copy()
        for g in range(1, G):
            L += T[g][:, Y[g]]
        mx = L.max(axis=0)
        E = w[:, None] * np.exp(L - mx)
        den = E.sum(axis=0)
        P = np.exp(mx) * den
        q = np.empty((G, len(idx)))
        for g in range(G):
            q[g] = (E * S[g][:, Y[g]]).sum(axis=0)
        u = coef @ q
        if include_tau:
            EZ = E * dbdt[:, None]
            r = np.zeros(len(idx))
            for g in range(G):
                r += (EZ * S[g][:, Y[g]]).sum(axis=0)
            u = np.vstack([u, r])
        s = u / den
        sp = s * P
        info += sp @ s.T
        svec += sp.sum(axis=1)
        psum += P.sum()
    return psum, svec, info


def accumulate_outcome_information(T, S, sizes, w, dbdt, coef, include_tau, start, stop):
    """Sum P(y), P(y)*s(y) and P(y)*s(y)s(y)' over configurations [start, stop).

    Args:
        T: (G, M, maxN+1) log binomial pmf tables per group and node.
        S: matching per-count score factor tables.
        sizes: per-group count-space sizes (N_g + 1).
        w: quadrature weights, normalized to sum to 1.
        dbdt: derivative of each node position with respect to tau.
        coef: (n_fixed, G) per-group multipliers of the fixed coordinates.
        include_tau: whether tau is a free coordinate (appended last).
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    if USE_NUMBA:
        return _accumulate_loop(T, S, sizes, w, dbdt, coef, bool(include_tau), start, stop)
    return _accumulate_numpy(T, S, sizes, w, dbdt, coef, bool(include_tau), start, stop)
