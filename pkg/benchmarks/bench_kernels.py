"""Compare the numba and numpy kernel lanes on representative workloads.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Each workload rebuilds its objects from scratch so cached bases cannot leak
between lanes; the numba lane gets one untimed warm-up call to absorb JIT
compilation.
"""

import argparse
import time

from splincal import kernels
from splincal.frobenius import (
    QuotientRing,
    SplittingWitness,
    enumerate_compatible,
    fedder_fpure,
    frobenius_closure,
)
from splincal.groebner import Ideal, buchberger
from splincal.poly import PolyRing


def fermat_witness():
    R = PolyRing(7, ("x", "y", "z"))
    Q = QuotientRing(R, Ideal(R, [R.parse("x^3 + y^3 + z^3")]))
    res = fedder_fpure(Q)
    assert res.fpure


def fermat_lattice():
    R = PolyRing(7, ("x", "y", "z"))
    Q = QuotientRing(R, Ideal(R, [R.parse("x^3 + y^3 + z^3")]))
    lattice = enumerate_compatible(fedder_fpure(Q).witness, Q)
    assert lattice.size() == 3


def node_lattice():
    R = PolyRing(5, ("x", "y"))
    Q = QuotientRing(R, Ideal(R, [R.parse("x*y")]))
    w = SplittingWitness(Q, R.parse("(x*y)^4"))
    assert enumerate_compatible(w, Q).size() == 5


def closure_char2():
    R = PolyRing(2, ("x", "y", "z"))
    Q = QuotientRing(R, Ideal(R, [R.parse("z^2 + x^3 + y^3")]))
    out = frobenius_closure(Q, Ideal(R, [R.variable("x"), R.variable("y")]), e_max=3)
    assert out.stabilized_at == 1


def closure_fermat_level2():
    R = PolyRing(7, ("x", "y", "z"))
    Q = QuotientRing(R, Ideal(R, [R.parse("x^3 + y^3 + z^3")]))
    J = Ideal(R, [R.variable("x"), R.variable("y")])
    out = frobenius_closure(Q, J, e_max=2)
    assert out.stabilized_at == 1


def dense_groebner():
    R = PolyRing(31, ("x", "y", "z"))
    gens = [
        R.parse("x^2*y + 3*y^2*z + 5*z^3 + 1"),
        R.parse("x*y*z + 7*x + 2"),
        R.parse("y^3 + 11*z^2 + x"),
    ]
    gb = buchberger(gens, R)
    assert gb


WORKLOADS = [
    ("fedder witness (Fermat-7)", fermat_witness),
    ("lattice enumeration (node)", node_lattice),
    ("lattice enumeration (Fermat-7)", fermat_lattice),
    ("Frobenius closure (char 2, e<=3)", closure_char2),
    ("Frobenius closure (Fermat-7, e<=2)", closure_fermat_level2),
    ("dense Groebner basis (p=31)", dense_groebner),
]


def run(repeat):
    timings = {}
    for backend in ("numpy", "numba"):
        kernels.set_backend(backend)
        for label, fn in WORKLOADS:
            fn()  # warm-up: JIT compilation and any lazy imports
            best = min(_timed(fn) for _ in range(repeat))
            timings[(backend, label)] = best
    width = max(len(label) for label, _ in WORKLOADS)
    print(f"{'workload':<{width}}  {'numpy':>9}  {'numba':>9}  {'speedup':>8}")
    for label, _ in WORKLOADS:
        a = timings[("numpy", label)]
        b = timings[("numba", label)]
        print(f"{label:<{width}}  {a:>8.3f}s  {b:>8.3f}s  {a / b:>7.2f}x")


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    run(parser.parse_args().repeat)
