"""Vectorized term-array kernels.

A polynomial is a pair ``(exps, coeffs)`` with ``exps`` an ``int64[t, n]``
exponent matrix and ``coeffs`` an ``int64[t]`` vector of residues in
``[1, p)``, rows sorted strictly descending in the active monomial order.
Order codes: 0 = lex, 1 = grevlex, 2 = block (grevlex on ``[0:split)``,
ties broken by grevlex on ``[split:n)``).
"""

import numpy as np

MAX_EXP = 1 << 62

NAME = "numpy"


def sort_keys(exps, ocode, osplit):
    """Key matrix whose row-wise lexicographic order equals the monomial order."""
    t, n = exps.shape
    if ocode == 0:
        return exps
    if ocode == 1:
        keys = np.empty((t, n + 1), dtype=np.int64)
        keys[:, 0] = exps.sum(axis=1)
        keys[:, 1:] = -exps[:, ::-1]
        return keys
    keys = np.empty((t, n + 2), dtype=np.int64)
    keys[:, 0] = exps[:, :osplit].sum(axis=1)
    keys[:, 1 : osplit + 1] = -exps[:, osplit - 1 :: -1]
    keys[:, osplit + 1] = exps[:, osplit:].sum(axis=1)
    keys[:, osplit + 2 :] = -exps[:, : osplit - 1 : -1]
    return keys


def canonicalize(exps, coeffs, p, ocode, osplit):
    """Sort descending, combine equal monomials mod p, drop zero terms."""
    if len(coeffs) == 0:
        return exps.reshape(0, exps.shape[1]), coeffs
    keys = sort_keys(exps, ocode, osplit)
    order = np.lexsort(keys.T[::-1])[::-1]
    exps = exps[order]
    keys = keys[order]
    coeffs = coeffs[order]
    if len(coeffs) > 1:
        boundary = np.concatenate(
            ([True], np.any(keys[1:] != keys[:-1], axis=1))
        )
        starts = np.flatnonzero(boundary)
        coeffs = np.add.reduceat(coeffs, starts) % p
        exps = exps[starts]
    else:
        coeffs = coeffs % p
    keep = coeffs != 0
    return np.ascontiguousarray(exps[keep]), np.ascontiguousarray(coeffs[keep])


def merge(ea, ca, eb, cb, p, ocode, osplit):
    """Canonical sum of two canonical term arrays."""
    if len(ca) == 0:
        return eb.copy(), cb.copy()
    if len(cb) == 0:
        return ea.copy(), ca.copy()
    return canonicalize(
        np.concatenate([ea, eb]), np.concatenate([ca, cb]), p, ocode, osplit
    )


def scale(exps, coeffs, mono, coef, p):
    """Multiply by ``coef * x^mono``; keeps canonical form."""
    coef = int(coef) % p
    if coef == 0 or len(coeffs) == 0:
        return exps[:0], coeffs[:0]
    out = exps + mono[None, :]
    if out.max(initial=0) > MAX_EXP:
        raise OverflowError("monomial exponent overflow")
    return out, (coeffs * coef) % p


def multiply(ea, ca, eb, cb, p, ocode, osplit):
    """Canonical product of two canonical term arrays."""
    ta, tb = len(ca), len(cb)
    if ta == 0 or tb == 0:
        return ea[:0], ca[:0]
    exps = ea[:, None, :] + eb[None, :, :]
    if exps.max() > MAX_EXP:
        raise OverflowError("monomial exponent overflow")
    coeffs = ca[:, None] * cb[None, :]
    n = ea.shape[1]
    return canonicalize(exps.reshape(ta * tb, n), coeffs.reshape(ta * tb), p, ocode, osplit)


def normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit):
    """Remainder of f under multivariate division by the packed basis.

    ``ge, gc`` concatenate the basis polynomials, ``offs[i]:offs[i+1]`` giving
    element ``i`` (lead term first); ``ginv[i]`` is the inverse of its lead
    coefficient mod p.
    """
    k = len(offs) - 1
    lead_rows = ge[offs[:-1]] if k else None
    rem_e = []
    rem_c = []
    cur_e, cur_c = fe, fc
    while len(cur_c):
        le = cur_e[0]
        if k:
            divisible = np.flatnonzero(np.all(lead_rows <= le, axis=1))
        else:
            divisible = ()
        if len(divisible) == 0:
            rem_e.append(le)
            rem_c.append(cur_c[0])
            cur_e, cur_c = cur_e[1:], cur_c[1:]
            continue
        j = divisible[0]
        s, t = offs[j], offs[j + 1]
        qc = (p - (int(cur_c[0]) * int(ginv[j])) % p) % p
        se, sc = scale(ge[s:t], gc[s:t], le - ge[s], qc, p)
        cur_e, cur_c = merge(cur_e, cur_c, se, sc, p, ocode, osplit)
    if rem_c:
        return np.array(rem_e, dtype=np.int64), np.array(rem_c, dtype=np.int64)
    return fe[:0], fc[:0]
