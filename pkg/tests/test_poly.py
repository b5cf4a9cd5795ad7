import numpy as np
import pytest

from splincal.errors import ExponentOverflowError, ParseError, PreconditionError, RingMismatchError
from splincal.poly import (
    LEX,
    MonomialOrder,
    PolyRing,
    frobenius_power_poly,
    is_prime,
    poly_arith,
    substitute,
)

from oracles import d_add, d_eq, d_from, d_mul, d_pow


def ring(p=5, names=("x", "y"), order=None):
    return PolyRing(p, names, order)


def random_poly(rng, R, max_terms=6, max_exp=4):
    t = rng.integers(1, max_terms + 1)
    exps = rng.integers(0, max_exp + 1, size=(t, R.nvars)).astype(np.int64)
    coeffs = rng.integers(0, R.p, size=t).astype(np.int64)
    return R.poly(exps, coeffs)


def test_prime_check():
    assert is_prime(2) and is_prime(7) and is_prime(2147483647)
    assert not is_prime(1) and not is_prime(6) and not is_prime(0)
    with pytest.raises(PreconditionError):
        PolyRing(6, ("x",))
    with pytest.raises(PreconditionError):
        PolyRing((1 << 31) + 11, ("x",))


def test_arith_identities():
    R = ring()
    x, y = R.variable("x"), R.variable("y")
    assert poly_arith("add", x + y, -y) == x
    R2 = ring(2, ("x", "y"))
    f = R2.parse("x + y")
    assert str(poly_arith("mul", f, f)) == "x^2 + y^2"
    assert poly_arith("mul", f, R2.zero()).is_zero()


def test_ring_mismatch_raises():
    a = ring().variable("x")
    b = ring(7, ("x", "y")).variable("x")
    with pytest.raises(RingMismatchError):
        a + b


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_arith_vs_dict_oracle(backend, p):
    rng = np.random.default_rng(p * 100 + (backend == "numba"))
    R = PolyRing(p, ("x", "y", "z"))
    for _ in range(40):
        f = random_poly(rng, R)
        g = random_poly(rng, R)
        assert d_eq(d_from(f + g), d_add(d_from(f), d_from(g), p))
        assert d_eq(d_from(f * g), d_mul(d_from(f), d_from(g), p))
        assert d_eq(d_from(f - g), d_add(d_from(f), d_from(-g), p))


def test_distributivity_random():
    rng = np.random.default_rng(11)
    R = ring(7, ("x", "y", "z"))
    for _ in range(50):
        f, g, h = (random_poly(rng, R) for _ in range(3))
        assert f * (g + h) == f * g + f * h


def test_pow_matches_oracle():
    rng = np.random.default_rng(3)
    R = ring(5, ("x", "y"))
    for _ in range(10):
        f = random_poly(rng, R, max_terms=3, max_exp=2)
        for n in range(4):
            assert d_eq(d_from(f ** n), d_pow(d_from(f), n, 5, 2))


def test_frobenius_examples():
    R2 = ring(2, ("x", "y"))
    assert str(frobenius_power_poly(R2.parse("x + y"), 1)) == "x^2 + y^2"
    R3 = ring(3, ("x", "y", "z"))
    f = R3.parse("x + y + z")
    assert frobenius_power_poly(f, 1) == f * f * f
    assert str(frobenius_power_poly(f, 1)) == "x^3 + y^3 + z^3"
    assert frobenius_power_poly(R3.zero(), 2).is_zero()


def test_frobenius_is_iterated_and_additive():
    rng = np.random.default_rng(4)
    R = ring(3, ("x", "y"))
    for _ in range(20):
        f = random_poly(rng, R)
        g = random_poly(rng, R)
        assert frobenius_power_poly(f, 2) == frobenius_power_poly(
            frobenius_power_poly(f, 1), 1
        )
        assert frobenius_power_poly(f + g, 2) == frobenius_power_poly(
            f, 2
        ) + frobenius_power_poly(g, 2)


def test_frobenius_matches_dict_oracle():
    rng = np.random.default_rng(5)
    R = ring(5, ("x", "y"))
    for _ in range(20):
        f = random_poly(rng, R)
        assert d_eq(d_from(frobenius_power_poly(f, 1)), d_frobenius_ref(d_from(f), 1, 5))


def d_frobenius_ref(d, e, p):
    from oracles import d_frobenius

    return d_frobenius(d, e, p)


def test_substitute_examples():
    R = ring(5, ("x", "y"))
    x, y = R.variable("x"), R.variable("y")
    assert substitute(R.parse("x^2"), [y, y]) == y * y
    assert str(substitute(R.parse("x + 1"), [R.parse("x^5"), y])) == "x^5 + 1"
    assert substitute(R.parse("x*y"), [R.parse("x^2"), R.parse("y^3")]) == R.parse(
        "x^2*y^3"
    )
    with pytest.raises(PreconditionError):
        substitute(R.parse("x"), [x])


def test_substitute_is_homomorphism():
    rng = np.random.default_rng(6)
    R = ring(7, ("x", "y"))
    images = [R.parse("x^2 + y"), R.parse("y + 1")]
    for _ in range(15):
        f = random_poly(rng, R, max_terms=4, max_exp=3)
        g = random_poly(rng, R, max_terms=4, max_exp=3)
        assert substitute(f * g, images) == substitute(f, images) * substitute(g, images)
        assert substitute(f + g, images) == substitute(f, images) + substitute(g, images)


def test_parse_print_roundtrip_random(backend):
    rng = np.random.default_rng(7)
    for p in (2, 5, 31):
        R = PolyRing(p, ("x", "y", "z"))
        for _ in range(60):
            f = random_poly(rng, R)
            assert R.parse(str(f)) == f
    assert str(PolyRing(5, ("x",)).zero()) == "0"


def test_canonical_text_form():
    R = ring(7, ("x", "y", "z"))
    assert str(R.parse("3*x^2*y + z")) == "3*x^2*y + z"
    assert str(R.parse("z + 3*x^2*y")) == "3*x^2*y + z"
    assert str(R.parse("x - y")) == "x + 6*y"
    assert str(R.one()) == "1"
    assert str(R.parse("(x+y)^2 - x^2 - y^2")) == "2*x*y"


def test_parse_errors_have_positions():
    R = ring()
    with pytest.raises(ParseError):
        R.parse("x + w")
    with pytest.raises(ParseError):
        R.parse("x +")
    with pytest.raises(ParseError):
        R.parse("x ^ y")
    with pytest.raises(ParseError):
        R.parse("(x + y")


def test_lex_vs_grevlex_order():
    Rg = ring(5, ("x", "y"))
    Rl = ring(5, ("x", "y"), MonomialOrder(LEX))
    f = "x^2 + x*y^2"
    assert str(Rg.parse(f)) == "x*y^2 + x^2"
    assert str(Rl.parse(f)) == "x^2 + x*y^2"


def test_order_is_multiplicative():
    rng = np.random.default_rng(8)
    R = ring(5, ("x", "y", "z"))
    for _ in range(60):
        a, b, c = (rng.integers(0, 5, size=3).astype(np.int64) for _ in range(3))
        fa, fb = R.monomial(a), R.monomial(b)
        if fa.canonical_key() > fb.canonical_key():
            assert (fa * R.monomial(c)).canonical_key() > (fb * R.monomial(c)).canonical_key()


def test_exponent_overflow_errors():
    R = ring(5, ("x",))
    f = R.monomial(np.array([(1 << 61) + 1], dtype=np.int64))
    with pytest.raises(ExponentOverflowError):
        f * f
    with pytest.raises(ExponentOverflowError):
        f.frobenius_power(2)


def test_immutability():
    R = ring()
    f = R.parse("x + y")
    with pytest.raises(ValueError):
        f.exps[0, 0] = 3
