import numpy as np
import pytest

from splincal.errors import PreconditionError
from splincal.frobenius import QuotientRing, compatible_test, fedder_fpure
from splincal.groebner import Ideal
from splincal.poly import PolyRing
from splincal.splinter import (
    FiniteExtension,
    contract_ideal,
    default_sample_family,
    ideal_trace_sample,
    is_radical_scoped,
    split_check,
    splinter_report,
    trace_chain,
    trace_ideal,
    verify_generically_etale,
    verify_module_finite,
)

from oracles import hom_oracle_trace


def I(R, *texts):
    return Ideal(R, [R.parse(t) for t in texts])


def make_ext(base, adjoined, rel_texts, name="B"):
    probe = FiniteExtension(base, adjoined, [], name=name)
    rels = [probe.ring.parse(t) for t in rel_texts]
    return FiniteExtension(base, adjoined, rels, name=name)


def line(p=5):
    R = PolyRing(p, ("x",))
    return R, QuotientRing(R, Ideal(R, [R.zero()]))


def cusp(p=5):
    R = PolyRing(p, ("u", "v"))
    return R, QuotientRing(R, I(R, "v^2 - u^3"))


def cusp_normalization(p=5):
    R, A = cusp(p)
    return R, A, make_ext(A, ("t",), ["t^2 - u", "t*u - v", "t*v - u^2"], name="N")


def veronese(p=5):
    R = PolyRing(p, ("a", "b", "c"))
    V = QuotientRing(R, I(R, "b^2 - a*c"))
    return R, V, make_ext(V, ("x", "y"), ["x^2 - a", "x*y - b", "y^2 - c"], name="P")


# ---- module finiteness --------------------------------------------------------


def test_module_finite_examples():
    R, A = line()
    B = make_ext(A, ("t",), ["t^2 - x"])
    cert = verify_module_finite(B)
    assert [str(m) for m in cert.module_generators] == ["1", "t"]
    with pytest.raises(PreconditionError):
        verify_module_finite(make_ext(A, ("t",), ["t*x - 1"]))
    trivial = make_ext(A, ("t",), ["t - x^3"])
    assert [str(m) for m in verify_module_finite(trivial).module_generators] == ["1"]


def test_injectivity_check():
    R, A = cusp()
    _, _, N = cusp_normalization()
    verify_module_finite(N)  # base injects into its normalization


# ---- contraction --------------------------------------------------------------


def test_contract_trivial_extension_is_identity():
    R, A = line()
    B = make_ext(A, ("t",), ["t - x^3"])
    J = I(R, "x^2")
    assert contract_ideal(B, J) == J


def test_contract_cusp_example():
    R, A, N = cusp_normalization()
    assert contract_ideal(N, I(R, "u")) == I(R, "u", "v")


def test_contract_split_extension_identity_on_probes():
    rng = np.random.default_rng(51)
    R, A = line()
    B = make_ext(A, ("t",), ["t^2 - x"])
    for _ in range(10):
        c = [int(rng.integers(0, 5)) for _ in range(3)]
        f = R.parse(f"x^2 + {c[0]}*x + {c[1]}") if c[1] else R.parse(f"x^3 + {c[0]}")
        J = Ideal(R, [f])
        assert contract_ideal(B, J) == J


def test_contract_contains_input():
    R, A, N = cusp_normalization()
    for text in ("u", "v", "u + v", "u^2"):
        J = I(R, text)
        assert contract_ideal(N, J).contains_ideal(J)


# ---- traces -------------------------------------------------------------------


def test_trace_free_quadratic_is_unit():
    for p in (5, 7):
        R, A = line(p)
        B = make_ext(A, ("t",), ["t^2 - x"])
        assert trace_ideal(B).is_unit()
        assert split_check(B)


def test_trace_cusp_is_maximal_ideal():
    for p in (5, 7):
        R, A, N = cusp_normalization(p)
        assert trace_ideal(N) == I(R, "u", "v")
        assert not split_check(N)


def test_trace_veronese_is_unit():
    for p in (5, 7):
        R, V, P = veronese(p)
        assert trace_ideal(P).is_unit()
        assert split_check(P)


def test_trace_matches_hom_oracle_truncation_6():
    R, A, N = cusp_normalization()
    assert hom_oracle_trace(N, 6) == trace_ideal(N)
    R2, V, P = veronese()
    assert hom_oracle_trace(P, 6) == trace_ideal(P)


def test_trace_is_compatible_with_witnesses():
    R, V, P = veronese()
    w = fedder_fpure(V).witness
    tau = trace_ideal(P)
    assert compatible_test(w, tau.plus(V.defining))
    Rl, A = line(5)
    B = make_ext(A, ("t",), ["t^2 - x"])
    wl = fedder_fpure(A).witness
    assert compatible_test(wl, trace_ideal(B).plus(A.defining))


# ---- ideal trace sampling ------------------------------------------------------


def test_sample_split_extension_unit():
    R, A = line()
    B = make_ext(A, ("t",), ["t^2 - x"])
    sample, warnings = ideal_trace_sample(B, default_sample_family(A))
    assert sample.is_unit()
    assert not warnings


def test_sample_cusp_example():
    R, A, N = cusp_normalization()
    sample, warnings = ideal_trace_sample(N, [I(R, "u")])
    assert sample == I(R, "u", "v")
    assert not warnings  # (u) + (v^2 - u^3) is primary to (u, v)


def test_sample_non_primary_is_still_upper_bound():
    R, A, N = cusp_normalization()
    sample, warnings = ideal_trace_sample(N, [I(R, "u^2 - 1")])
    assert warnings
    assert sample.contains_ideal(trace_ideal(N))


def test_sample_unit_family_member():
    R, A, N = cusp_normalization()
    sample, warnings = ideal_trace_sample(N, [I(R, "1")])
    assert sample.is_unit()
    assert warnings


def test_trace_contained_in_every_sample():
    R, A, N = cusp_normalization()
    tau = trace_ideal(N)
    for family in ([I(R, "u")], default_sample_family(A), [I(R, "u", "v")]):
        sample, _ = ideal_trace_sample(N, family)
        assert sample.contains_ideal(tau)


# ---- generic etaleness ----------------------------------------------------------


def test_etale_quadratic_odd_char():
    R, A = line(5)
    B = make_ext(A, ("t",), ["t^2 - x"])
    cert = verify_generically_etale(B)
    assert cert.verdict
    assert str(cert.determinant) == "2*t"


def test_etale_fails_in_char_2():
    R, A = line(2)
    B = make_ext(A, ("t",), ["t^2 - x"])
    assert not verify_generically_etale(B).verdict


def test_etale_trivial_extension():
    R, A = line(5)
    B = make_ext(A, ("t",), ["t - x^3"])
    assert verify_generically_etale(B).verdict
    empty = FiniteExtension(A, (), [], name="A")
    assert verify_generically_etale(empty).verdict


def test_etale_requires_domains():
    R = PolyRing(5, ("x", "y"))
    node = QuotientRing(R, I(R, "x*y"))
    B = make_ext(node, ("t",), ["t^2 - x"])
    with pytest.raises(PreconditionError):
        verify_generically_etale(B)


# ---- chains ----------------------------------------------------------------------


def test_chain_empty_has_unit_obstruction():
    R, A = line()
    report = trace_chain(A, [])
    assert report.obstruction.is_unit()


def test_chain_iterated_quadratic():
    for p in (5, 7):
        R, A = line(p)
        B1 = make_ext(A, ("t",), ["t^2 - x"], name="B1")
        B2 = make_ext(A, ("t", "s"), ["t^2 - x", "s^2 - t"], name="B2")
        report = trace_chain(A, [B1, B2])
        assert [t.key() for t in report.traces] == [("1",), ("1",)]
        assert report.stabilized_at == 1
        assert report.obstruction.is_unit()


def test_chain_monotone_traces():
    R, A = line(5)
    B1 = make_ext(A, ("t",), ["t^2 - x"], name="B1")
    B2 = make_ext(A, ("t", "s"), ["t^2 - x", "s^2 - t"], name="B2")
    report = trace_chain(A, [B1, B2])
    for t1, t2 in zip(report.traces, report.traces[1:]):
        assert t1.contains_ideal(t2)


def test_chain_inclusion_uncertified():
    R, A = line()
    B1 = make_ext(A, ("t",), ["t^2 - x"], name="B1")
    B2 = make_ext(A, ("s",), ["s^2 - x"], name="B2")  # does not contain t
    with pytest.raises(PreconditionError):
        trace_chain(A, [B1, B2])


def test_chain_cusp_obstruction():
    R, A, N = cusp_normalization()
    report = trace_chain(A, [N])
    assert report.obstruction == I(R, "u", "v")


# ---- splinter reports --------------------------------------------------------------


def test_report_not_fpure_short_circuit():
    R = PolyRing(2, ("x", "y", "z"))
    A = QuotientRing(R, I(R, "x^3 + y^3 + z^3"))
    report = splinter_report(A, [])
    assert not report.fpure
    assert report.verdict == "NON_SPLINTER_AT_MAXIMAL"
    assert report.obstruction == A.maximal_ideal()
    assert "NOT_FPURE" in report.warnings


def test_report_cusp_non_splinter_at_m():
    for p in (5, 7):
        R, A, N = cusp_normalization(p)
        report = splinter_report(A, [N])
        assert report.verdict in (
            "NON_SPLINTER_AT_MAXIMAL",
            "CERTIFIED_NON_SPLINTER_ON_LOCUS",
        )
        assert report.obstruction == I(R, "u", "v")
        assert report.radical_flag is True


def test_report_veronese_no_obstruction():
    R, V, P = veronese()
    w = fedder_fpure(V).witness
    report = splinter_report(V, [P], witnesses=[w])
    assert report.fpure
    assert report.verdict == "NO_OBSTRUCTION_FOUND"
    assert all(report.compatible_flags.values())
    assert report.sample_containment is True
    assert report.radical_flag is True


def test_report_quadratic_chain_no_obstruction():
    R, A = line(7)
    B1 = make_ext(A, ("t",), ["t^2 - x"], name="B1")
    report = splinter_report(A, [B1], witnesses=[fedder_fpure(A).witness])
    assert report.verdict == "NO_OBSTRUCTION_FOUND"
    assert report.stabilized_at is None


# ---- radical scoping ----------------------------------------------------------------


def test_is_radical_scoped():
    R = PolyRing(5, ("x", "y"))
    assert is_radical_scoped(I(R, "x", "y")) is True
    assert is_radical_scoped(I(R, "x^2")) is False
    assert is_radical_scoped(I(R, "x*y")) is True
    assert is_radical_scoped(I(R, "x^2*y")) is False
    assert is_radical_scoped(I(R, "x^2 - 1", "y")) is True
    assert is_radical_scoped(I(R, "x^2 + 1")) is True  # squarefree principal
    assert is_radical_scoped(I(R, "1")) is True


def test_etale_cusp_normalization():
    R, A, N = cusp_normalization()
    cert = verify_generically_etale(N)
    assert cert.verdict  # both fraction fields are the rational function field


def test_report_empty_chain_on_fpure_ring():
    R, A = line(7)
    report = splinter_report(A, [])
    assert report.fpure
    assert report.verdict == "NO_OBSTRUCTION_FOUND"
    assert report.obstruction.is_unit()


def test_purely_inseparable_extension_splits_but_is_not_etale():
    R, A = line(5)
    B = make_ext(A, ("t",), ["t^5 - x"], name="F")
    assert split_check(B)  # free of rank p as a module, so a direct summand
    assert not verify_generically_etale(B).verdict


def node_normalization(p=5):
    R = PolyRing(p, ("x", "y"))
    A = QuotientRing(R, I(R, "x*y"))
    return R, A, make_ext(A, ("e",), ["e^2 - e", "e*x - x", "e*y"], name="NN")


def test_node_normalization_trace_is_conductor():
    R, A, NN = node_normalization()
    assert [str(m) for m in NN.certificate().module_generators] == ["1", "e"]
    tau = trace_ideal(NN)
    assert tau == I(R, "x", "y")
    assert not split_check(NN)
    w = fedder_fpure(A).witness
    assert compatible_test(w, tau.plus(A.defining))


def test_node_normalization_report():
    R, A, NN = node_normalization()
    report = splinter_report(A, [NN], witnesses=[fedder_fpure(A).witness])
    assert report.fpure
    assert report.verdict == "CERTIFIED_NON_SPLINTER_ON_LOCUS"
    assert report.obstruction == I(R, "x", "y")
    assert report.radical_flag is True
    assert report.sample_containment is True
    assert all(report.compatible_flags.values())


def test_node_normalization_detecting_family_member():
    # the principal m-primary ideal (x + y) detects the trace exactly
    R, A, NN = node_normalization()
    sample, warnings = ideal_trace_sample(NN, [I(R, "x + y")])
    assert not warnings
    assert sample == trace_ideal(NN)
