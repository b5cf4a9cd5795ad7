"""Numba-compiled term-array kernels; same contract as numpy_backend."""

import numpy as np
from numba import njit

MAX_EXP = 1 << 62

NAME = "numba"


@njit(cache=True)
def _cmp(a, ai, b, bi, ocode, osplit):
    # compare monomial rows a[ai], b[bi]; 1 if >, -1 if <, 0 if equal
    n = a.shape[1]
    if ocode == 0:
        for i in range(n):
            d = a[ai, i] - b[bi, i]
            if d != 0:
                return 1 if d > 0 else -1
        return 0
    if ocode == 1:
        da = np.int64(0)
        db = np.int64(0)
        for i in range(n):
            da += a[ai, i]
            db += b[bi, i]
        if da != db:
            return 1 if da > db else -1
        for i in range(n - 1, -1, -1):
            d = a[ai, i] - b[bi, i]
            if d != 0:
                return -1 if d > 0 else 1
        return 0
    da = np.int64(0)
    db = np.int64(0)
    for i in range(osplit):
        da += a[ai, i]
        db += b[bi, i]
    if da != db:
        return 1 if da > db else -1
    for i in range(osplit - 1, -1, -1):
        d = a[ai, i] - b[bi, i]
        if d != 0:
            return -1 if d > 0 else 1
    da = 0
    db = 0
    for i in range(osplit, n):
        da += a[ai, i]
        db += b[bi, i]
    if da != db:
        return 1 if da > db else -1
    for i in range(n - 1, osplit - 1, -1):
        d = a[ai, i] - b[bi, i]
        if d != 0:
            return -1 if d > 0 else 1
    return 0


@njit(cache=True)
def _merge(ea, ca, eb, cb, p, ocode, osplit):
    ta = ca.shape[0]
    tb = cb.shape[0]
    n = ea.shape[1]
    oe = np.empty((ta + tb, n), dtype=np.int64)
    oc = np.empty(ta + tb, dtype=np.int64)
    i = 0
    j = 0
    k = 0
    while i < ta and j < tb:
        c = _cmp(ea, i, eb, j, ocode, osplit)
        if c > 0:
            for v in range(n):
                oe[k, v] = ea[i, v]
            oc[k] = ca[i]
            i += 1
            k += 1
        elif c < 0:
            for v in range(n):
                oe[k, v] = eb[j, v]
            oc[k] = cb[j]
            j += 1
            k += 1
        else:
            s = (ca[i] + cb[j]) % p
            if s != 0:
                for v in range(n):
                    oe[k, v] = ea[i, v]
                oc[k] = s
                k += 1
            i += 1
            j += 1
    while i < ta:
        for v in range(n):
            oe[k, v] = ea[i, v]
        oc[k] = ca[i]
        i += 1
        k += 1
    while j < tb:
        for v in range(n):
            oe[k, v] = eb[j, v]
        oc[k] = cb[j]
        j += 1
        k += 1
    return oe[:k].copy(), oc[:k].copy()


@njit(cache=True)
def _scale(exps, coeffs, mono, coef, p):
    t = coeffs.shape[0]
    n = exps.shape[1]
    c = coef % p
    if c == 0 or t == 0:
        return np.empty((0, n), dtype=np.int64), np.empty(0, dtype=np.int64)
    oe = np.empty((t, n), dtype=np.int64)
    oc = np.empty(t, dtype=np.int64)
    for i in range(t):
        for v in range(n):
            e = exps[i, v] + mono[v]
            if e > MAX_EXP:
                raise OverflowError("monomial exponent overflow")
            oe[i, v] = e
        oc[i] = (coeffs[i] * c) % p
    return oe, oc


@njit(cache=True)
def _multiply(ea, ca, eb, cb, p, ocode, osplit):
    n = ea.shape[1]
    if ca.shape[0] == 0 or cb.shape[0] == 0:
        return np.empty((0, n), dtype=np.int64), np.empty(0, dtype=np.int64)
    re, rc = _scale(ea, ca, eb[0], cb[0], p)
    for j in range(1, cb.shape[0]):
        se, sc = _scale(ea, ca, eb[j], cb[j], p)
        re, rc = _merge(re, rc, se, sc, p, ocode, osplit)
    return re, rc


@njit(cache=True)
def _normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit):
    n = fe.shape[1]
    k = offs.shape[0] - 1
    rem_e = np.empty((fc.shape[0] + 16, n), dtype=np.int64)
    rem_c = np.empty(fc.shape[0] + 16, dtype=np.int64)
    nrem = 0
    cur_e = fe.copy()
    cur_c = fc.copy()
    while cur_c.shape[0] > 0:
        j = -1
        for g in range(k):
            row = offs[g]
            ok = True
            for v in range(n):
                if ge[row, v] > cur_e[0, v]:
                    ok = False
                    break
            if ok:
                j = g
                break
        if j < 0:
            if nrem == rem_c.shape[0]:
                ne = np.empty((nrem * 2, n), dtype=np.int64)
                nc = np.empty(nrem * 2, dtype=np.int64)
                ne[:nrem] = rem_e
                nc[:nrem] = rem_c
                rem_e = ne
                rem_c = nc
            for v in range(n):
                rem_e[nrem, v] = cur_e[0, v]
            rem_c[nrem] = cur_c[0]
            nrem += 1
            cur_e = cur_e[1:].copy()
            cur_c = cur_c[1:].copy()
            continue
        s = offs[j]
        t = offs[j + 1]
        mono = np.empty(n, dtype=np.int64)
        for v in range(n):
            mono[v] = cur_e[0, v] - ge[s, v]
        qc = (p - (cur_c[0] * ginv[j]) % p) % p
        se, sc = _scale(ge[s:t], gc[s:t], mono, qc, p)
        cur_e, cur_c = _merge(cur_e, cur_c, se, sc, p, ocode, osplit)
    return rem_e[:nrem].copy(), rem_c[:nrem].copy()


def merge(ea, ca, eb, cb, p, ocode, osplit):
    if len(ca) == 0:
        return eb.copy(), cb.copy()
    if len(cb) == 0:
        return ea.copy(), ca.copy()
    return _merge(ea, ca, eb, cb, p, ocode, osplit)


def scale(exps, coeffs, mono, coef, p):
    return _scale(exps, coeffs, np.ascontiguousarray(mono), int(coef), p)


def multiply(ea, ca, eb, cb, p, ocode, osplit):
    return _multiply(ea, ca, eb, cb, p, ocode, osplit)


def normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit):
    if len(fc) == 0 or len(offs) - 1 == 0:
        return fe.copy(), fc.copy()
    return _normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit)
