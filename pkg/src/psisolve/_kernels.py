"""Inner loops shared by the solver and the grid checks.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy one
with identical semantics. The numba path is used when numba imports and
``PSISOLVE_DISABLE_NUMBA`` is unset (or ``0``); ``set_backend`` switches at
runtime, which the test-suite and the benchmark rely on.
"""

import os

import numpy as np

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled():
    return os.environ.get("PSISOLVE_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


_backend = "numba" if HAVE_NUMBA and not _env_disabled() else "numpy"


def backend():
    return _backend


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"``; returns the previous choice."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    previous, _backend = _backend, name
    return previous


# ---------------------------------------------------------------------------
# numpy implementations


def weighted_colsum_numpy(values, weights):
    """Neumaier-compensated ``sum_i weights[i] * values[i, :]``.

    Also returns ``sum_i |weights[i] * values[i, :]|``, the magnitude that
    sets the rounding scale of each column sum.
    """
    n, m = values.shape
    total = np.zeros(m)
    comp = np.zeros(m)
    mag = np.zeros(m)
    for i in range(n):
        term = weights[i] * values[i]
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp += np.where(big, (total - t) + term, (term - t) + total)
        total = t
        mag += np.abs(term)
    return total + comp, mag


def sign_scan_numpy(signs):
    """Locate the sign structure of a sampled function.

    Returns ``(last_pos, first_neg, inc_lo, inc_hi)``: the last index with a
    positive sign, the first index with a negative sign, and the first pair
    ``inc_lo < inc_hi`` with a negative sign before a positive one (``-1``
    when absent).
    """
    pos = np.flatnonzero(signs > 0)
    neg = np.flatnonzero(signs < 0)
    last_pos = int(pos[-1]) if pos.size else -1
    first_neg = int(neg[0]) if neg.size else -1
    inc_lo = inc_hi = -1
    if neg.size and pos.size:
        later = pos[pos > neg[0]]
        if later.size:
            inc_lo, inc_hi = int(neg[0]), int(later[0])
    return last_pos, first_neg, inc_lo, inc_hi


def increase_scan_numpy(values, eps, strict, rel):
    """Search grid pairs ``u < v`` violating ``f(u) <= f(v) + eps``.

    ``strict`` demands ``f(u) < f(v) + eps - rel*max(1, |f(u)|)``; the
    non-strict test forgives excesses up to ``rel*max(1, |f(u)|)``. Returns
    ``(u, v, margin)`` with ``u = v = -1`` when no violation exists and
    ``margin`` the smallest slack over all pairs.
    """
    m = values.shape[0]
    if m < 2:
        return -1, -1, np.inf
    pad = rel * np.maximum(1.0, np.abs(values))
    a = values + pad if strict else values - pad
    run = np.maximum.accumulate(a)
    idx = np.maximum.accumulate(np.where(a == run, np.arange(m), 0))
    slack = values[1:] + eps - run[:-1]
    bad = slack <= 0.0 if strict else slack < 0.0
    margin = float(slack.min())
    hits = np.flatnonzero(bad)
    if hits.size == 0:
        return -1, -1, margin
    v = int(hits[0]) + 1
    return int(idx[v - 1]), v, margin


def level_scan_numpy(values, y):
    """First grid pair ``u < v`` with ``y <= f(u)`` and ``y >= f(v)``."""
    above = np.flatnonzero(values >= y)
    if above.size == 0:
        return -1, -1
    u = int(above[0])
    below = np.flatnonzero(values[u + 1:] <= y)
    if below.size == 0:
        return -1, -1
    return u, u + 1 + int(below[0])


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def weighted_colsum_numba(values, weights):
        n, m = values.shape
        out = np.empty(m)
        mag = np.empty(m)
        for j in range(m):
            total = 0.0
            comp = 0.0
            size = 0.0
            for i in range(n):
                term = weights[i] * values[i, j]
                t = total + term
                if abs(total) >= abs(term):
                    comp += (total - t) + term
                else:
                    comp += (term - t) + total
                total = t
                size += abs(term)
            out[j] = total + comp
            mag[j] = size
        return out, mag

    @numba.njit(cache=True)
    def sign_scan_numba(signs):
        last_pos = -1
        first_neg = -1
        inc_lo = -1
        inc_hi = -1
        for k in range(signs.shape[0]):
            s = signs[k]
            if s > 0:
                last_pos = k
                if first_neg >= 0 and inc_hi < 0:
                    inc_lo = first_neg
                    inc_hi = k
            elif s < 0 and first_neg < 0:
                first_neg = k
        return last_pos, first_neg, inc_lo, inc_hi

    @numba.njit(cache=True)
    def increase_scan_numba(values, eps, strict, rel):
        m = values.shape[0]
        if m < 2:
            return -1, -1, np.inf
        best = -np.inf
        best_idx = -1
        margin = np.inf
        hit_u = -1
        hit_v = -1
        for k in range(m):
            f = values[k]
            if k > 0:
                slack = f + eps - best
                if slack < margin:
                    margin = slack
                if hit_v < 0:
                    if (strict and slack <= 0.0) or ((not strict) and slack < 0.0):
                        hit_u = best_idx
                        hit_v = k
            pad = rel * max(1.0, abs(f))
            a = f + pad if strict else f - pad
            if a >= best:
                best = a
                best_idx = k
        return hit_u, hit_v, margin

    @numba.njit(cache=True)
    def level_scan_numba(values, y):
        u = -1
        for k in range(values.shape[0]):
            if u < 0:
                if values[k] >= y:
                    u = k
            elif values[k] <= y:
                return u, k
        return -1, -1


# ---------------------------------------------------------------------------
# dispatch


def weighted_colsum(values, weights):
    values = np.ascontiguousarray(values, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if _backend == "numba":
        return weighted_colsum_numba(values, weights)
    return weighted_colsum_numpy(values, weights)


def sign_scan(signs):
    signs = np.ascontiguousarray(signs, dtype=np.int8)
    if _backend == "numba":
        return tuple(int(v) for v in sign_scan_numba(signs))
    return sign_scan_numpy(signs)


def increase_scan(values, eps=0.0, strict=True, rel=1e-13):
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _backend == "numba":
        u, v, margin = increase_scan_numba(values, float(eps), bool(strict), float(rel))
        return int(u), int(v), float(margin)
    return increase_scan_numpy(values, float(eps), bool(strict), float(rel))


def level_scan(values, y):
    values = np.ascontiguousarray(values, dtype=np.float64)
    if _backend == "numba":
        u, v = level_scan_numba(values, float(y))
        return int(u), int(v)
    return level_scan_numpy(values, float(y))
