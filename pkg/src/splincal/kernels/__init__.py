"""Kernel backend selection.

The hot inner loops (term merges, products, division remainders) have two
interchangeable implementations: numba-compiled loops and pure vectorized
numpy. ``SPLINCAL_KERNELS`` picks one (``numba``, ``numpy`` or ``auto``);
``auto`` prefers numba when it imports cleanly.
"""

import os

from . import numpy_backend

_impl = None


def _resolve(name):
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        from . import numba_backend

        return numba_backend
    if name == "auto":
        try:
            from . import numba_backend

            return numba_backend
        except ImportError:
            return numpy_backend
    raise ValueError(f"unknown kernel backend {name!r}")


def set_backend(name):
    global _impl
    _impl = _resolve(name)
    return _impl


def get_backend():
    return _impl


set_backend(os.environ.get("SPLINCAL_KERNELS", "auto"))

MAX_EXP = numpy_backend.MAX_EXP


def backend_name():
    return _impl.NAME


def merge(ea, ca, eb, cb, p, ocode, osplit):
    return _impl.merge(ea, ca, eb, cb, p, ocode, osplit)


def scale(exps, coeffs, mono, coef, p):
    return _impl.scale(exps, coeffs, mono, coef, p)


def multiply(ea, ca, eb, cb, p, ocode, osplit):
    return _impl.multiply(ea, ca, eb, cb, p, ocode, osplit)


def normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit):
    return _impl.normal_form(fe, fc, ge, gc, offs, ginv, p, ocode, osplit)


def canonicalize(exps, coeffs, p, ocode, osplit):
    # only the numpy lane needs a vectorized canonicalizer; it is also the
    # entry point polynomials use to normalize raw term lists
    return numpy_backend.canonicalize(exps, coeffs, p, ocode, osplit)
