"""Hot metric kernels with two interchangeable implementations.

Per stream index n (L = quarter period, window w = 2L, template length D):

    ac1(n) = sum_{m=0}^{2L-1} conj(r[n-m]) * r[n-m-L]
    ac2(n) = sum_{m=0}^{2L-1} conj(r[n-m]) * r[n-m-2L]
    ene(n) = sum_{m=0}^{2L-1} |r[n-m]|^2
    xcr(n) = sum_{m=0}^{D-1}  |conj(r[n-m]) * r[n-m-2L]| * a[m]

Samples before the stream start are treated as zeros, matching a streaming
correlator whose delay lines power up cleared.  Values are fully warmed up
once n >= 4L-1 (ac/ene) resp. n >= D+2L-1 (xcr).

Backends:
  numba   njit streaming loops, the default when numba imports
  numpy   cumsum sliding sums + np.convolve

Selected once at import from LDACS_SYNC_BACKEND (auto | numba | numpy).
Both give identical results up to float rounding (~1e-12 relative).
"""

from __future__ import annotations

import os

import numpy as np

ENV_BACKEND = "LDACS_SYNC_BACKEND"

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but keep the fallback honest
    _HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy backend


def _lag_products(r: np.ndarray, lag: int) -> np.ndarray:
    out = np.zeros(r.size, dtype=np.complex128)
    if lag < r.size:
        out[lag:] = np.conj(r[lag:]) * r[:-lag]
    return out


def _sliding_sum(x: np.ndarray, w: int) -> np.ndarray:
    cs = np.cumsum(x)
    out = cs.copy()
    if w < x.size:
        out[w:] = cs[w:] - cs[:-w]
    return out


def metric_arrays_numpy(
    r: np.ndarray, l_quarter: int, a: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    r = np.ascontiguousarray(r, dtype=np.complex128)
    w = 2 * l_quarter
    u = _lag_products(r, l_quarter)
    v = _lag_products(r, w)
    e = r.real**2 + r.imag**2
    ac1 = _sliding_sum(u, w)
    ac2 = _sliding_sum(v, w)
    ene = _sliding_sum(e, w)
    xcr = np.convolve(np.abs(v), np.asarray(a, dtype=np.float64))[: r.size]
    return ac1, ac2, ene, xcr


def first_trigger_numpy(cond: np.ndarray, m: int, start: int) -> int:
    """First index n with cond[n-m+1..n] all true and n-m+1 >= start; -1 if none."""
    c = np.asarray(cond, dtype=np.int64)
    if c.size < start + m:
        return -1
    runs = _sliding_sum(c, m)  # runs[n] = number of true in the last m slots
    ok = runs[start + m - 1 :] == m
    hits = np.nonzero(ok)[0]
    if hits.size == 0:
        return -1
    return int(hits[0]) + start + m - 1


# ---------------------------------------------------------------------------
# numba backend

if _HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _metric_arrays_njit(r, l_quarter, a):  # pragma: no cover - exercised via wrapper
        n = r.size
        L = l_quarter
        w = 2 * L
        d = a.size
        u = np.zeros(n, dtype=np.complex128)
        v = np.zeros(n, dtype=np.complex128)
        vm = np.zeros(n, dtype=np.float64)
        e = np.zeros(n, dtype=np.float64)
        ac1 = np.zeros(n, dtype=np.complex128)
        ac2 = np.zeros(n, dtype=np.complex128)
        ene = np.zeros(n, dtype=np.float64)
        xcr = np.zeros(n, dtype=np.float64)
        arev = a[::-1].copy()

        for k in prange(L, n):
            u[k] = r[k].conjugate() * r[k - L]
        for k in prange(w, n):
            vk = r[k].conjugate() * r[k - w]
            v[k] = vk
            vm[k] = np.sqrt(vk.real * vk.real + vk.imag * vk.imag)
        for k in prange(n):
            rk = r[k]
            e[k] = rk.real * rk.real + rk.imag * rk.imag

        s1 = 0.0 + 0.0j
        s2 = 0.0 + 0.0j
        se = 0.0
        for k in range(n):
            s1 += u[k]
            s2 += v[k]
            se += e[k]
            if k >= w:
                s1 -= u[k - w]
                s2 -= v[k - w]
                se -= e[k - w]
            ac1[k] = s1
            ac2[k] = s2
            ene[k] = se

        _weighted_window(vm, arev, xcr)
        return ac1, ac2, ene, xcr

    @njit(cache=True, fastmath=True, parallel=True)
    def _weighted_window(vm, arev, xcr):  # pragma: no cover - exercised via wrapper
        # np.dot on unit-stride slices beats any hand-unrolled reduction loop
        # here; parallel=True also enables the aggressive loop pipeline, which
        # is ~2x faster even on one core and scales when more are available
        n = vm.size
        d = arev.size
        head = d - 1 if d - 1 < n else n
        for k in range(head):
            xcr[k] = np.dot(vm[: k + 1], arev[d - 1 - k :])
        for k in prange(head, n):
            xcr[k] = np.dot(vm[k - d + 1 : k + 1], arev)

    @njit(cache=True)
    def _first_trigger_njit(cond, m, start):  # pragma: no cover - exercised via wrapper
        run = 0
        for k in range(start, cond.size):
            if cond[k]:
                run += 1
                if run >= m:
                    return k
            else:
                run = 0
        return -1

    def metric_arrays_numba(
        r: np.ndarray, l_quarter: int, a: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return _metric_arrays_njit(
            np.ascontiguousarray(r, dtype=np.complex128),
            l_quarter,
            np.ascontiguousarray(a, dtype=np.float64),
        )

    def first_trigger_numba(cond: np.ndarray, m: int, start: int) -> int:
        return int(_first_trigger_njit(np.ascontiguousarray(cond, dtype=np.bool_), m, start))

else:  # pragma: no cover
    metric_arrays_numba = None
    first_trigger_numba = None


# ---------------------------------------------------------------------------
# dispatch


def _pick_backend() -> str:
    choice = os.environ.get(ENV_BACKEND, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if _HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("LDACS_SYNC_BACKEND=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"unrecognized {ENV_BACKEND} value: {choice!r}")


_ACTIVE = _pick_backend()


def active_backend() -> str:
    """Name of the kernel backend selected at import ('numba' or 'numpy')."""
    return _ACTIVE


def metric_arrays(
    r: np.ndarray, l_quarter: int, a: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(ac1, ac2, ene, xcr) over the whole stream, active backend."""
    if _ACTIVE == "numba":
        return metric_arrays_numba(r, l_quarter, a)
    return metric_arrays_numpy(r, l_quarter, a)


def first_trigger(cond: np.ndarray, m: int, start: int) -> int:
    """First index where cond held m consecutive slots, scanning from start."""
    if _ACTIVE == "numba":
        return first_trigger_numba(cond, m, start)
    return first_trigger_numpy(cond, m, start)
