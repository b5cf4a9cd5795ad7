"""Exact sparse multivariate polynomials over prime fields F_p.

Terms are kept in canonical form: a sorted (strictly descending in the
ring's monomial order) int64 exponent matrix plus a coefficient vector of
residues in [1, p). The zero polynomial has no terms. All values are
immutable after construction; operations return fresh objects.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ExponentOverflowError, ParseError, PreconditionError, RingMismatchError

MAX_PRIME = (1 << 31) - 1

LEX = 0
GREVLEX = 1
BLOCK = 2

_ORDER_NAMES = {LEX: "lex", GREVLEX: "grevlex", BLOCK: "block"}


@dataclass(frozen=True)
class MonomialOrder:
    """Total multiplicative well-order on monomials.

    ``block`` compares the first ``split`` variables by grevlex and breaks
    ties with grevlex on the rest; it is the elimination order used for
    contractions.
    """

    kind: int = GREVLEX
    split: int = 0

    def __post_init__(self):
        if self.kind not in _ORDER_NAMES:
            raise ValueError(f"unknown order kind {self.kind}")
        if self.kind == BLOCK and self.split < 1:
            raise ValueError("block order needs split >= 1")

    @property
    def name(self):
        if self.kind == BLOCK:
            return f"block({self.split})"
        return _ORDER_NAMES[self.kind]


def stable_seed(*parts):
    """Process-independent RNG seed from string representations."""
    import zlib

    blob = "\x1f".join(str(p) for p in parts).encode()
    return zlib.crc32(blob)


def is_prime(n):
    """Deterministic Miller-Rabin, valid for every n below 3.2e9."""
    if n < 2:
        return False
    for q in (2, 3, 5, 7):
        if n % q == 0:
            return n == q
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PolyRing:
    """The ambient polynomial ring F_p[v1..vn] with an active monomial order."""

    __slots__ = ("p", "variables", "order", "_var_index")

    def __init__(self, p, variables, order=None):
        p = int(p)
        if not is_prime(p):
            raise PreconditionError(f"characteristic {p} is not prime", code="NON_PRIME")
        if p > MAX_PRIME:
            raise PreconditionError(f"characteristic {p} exceeds 2^31 - 1", code="NON_PRIME")
        variables = tuple(variables)
        if not variables:
            raise PreconditionError("a ring needs at least one variable")
        if len(set(variables)) != len(variables):
            raise PreconditionError("duplicate variable names")
        self.p = p
        self.variables = variables
        self.order = order if order is not None else MonomialOrder()
        self._var_index = {v: i for i, v in enumerate(variables)}

    @property
    def nvars(self):
        return len(self.variables)

    @property
    def ocode(self):
        return self.order.kind

    @property
    def osplit(self):
        return self.order.split

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and self.p == other.p
            and self.variables == other.variables
            and self.order == other.order
        )

    def __hash__(self):
        return hash((self.p, self.variables, self.order))

    def __repr__(self):
        return f"PolyRing(p={self.p}, vars={','.join(self.variables)}, order={self.order.name})"

    def with_order(self, order):
        return PolyRing(self.p, self.variables, order)

    # ---- constructors -------------------------------------------------

    def poly(self, exps, coeffs):
        exps = np.ascontiguousarray(exps, dtype=np.int64).reshape(-1, self.nvars)
        coeffs = np.ascontiguousarray(coeffs, dtype=np.int64)
        exps, coeffs = kernels.canonicalize(exps, coeffs, self.p, self.ocode, self.osplit)
        return Polynomial(self, exps, coeffs)

    def zero(self):
        return Polynomial(
            self,
            np.zeros((0, self.nvars), dtype=np.int64),
            np.zeros(0, dtype=np.int64),
        )

    def constant(self, c):
        c = int(c) % self.p
        if c == 0:
            return self.zero()
        return Polynomial(
            self,
            np.zeros((1, self.nvars), dtype=np.int64),
            np.array([c], dtype=np.int64),
        )

    def one(self):
        return self.constant(1)

    def variable(self, name_or_index):
        if isinstance(name_or_index, str):
            if name_or_index not in self._var_index:
                raise PreconditionError(f"unknown variable {name_or_index!r}")
            i = self._var_index[name_or_index]
        else:
            i = name_or_index
        e = np.zeros((1, self.nvars), dtype=np.int64)
        e[0, i] = 1
        return Polynomial(self, e, np.array([1], dtype=np.int64))

    def monomial(self, exponents, coeff=1):
        e = np.asarray(exponents, dtype=np.int64).reshape(1, self.nvars)
        return self.poly(e, np.array([coeff], dtype=np.int64))

    def product_of_variables(self):
        return self.monomial(np.ones(self.nvars, dtype=np.int64))

    def parse(self, text):
        return _parse_poly(self, text)


class Polynomial:
    __slots__ = ("ring", "exps", "coeffs")

    def __init__(self, ring, exps, coeffs):
        self.ring = ring
        exps.setflags(write=False)
        coeffs.setflags(write=False)
        self.exps = exps
        self.coeffs = coeffs

    # ---- structure -----------------------------------------------------

    def is_zero(self):
        return len(self.coeffs) == 0

    def is_one(self):
        return (
            len(self.coeffs) == 1
            and self.coeffs[0] == 1
            and not self.exps[0].any()
        )

    def is_constant(self):
        return len(self.coeffs) == 0 or (len(self.coeffs) == 1 and not self.exps[0].any())

    def is_monomial(self):
        return len(self.coeffs) == 1

    def num_terms(self):
        return len(self.coeffs)

    def lead_exps(self):
        if self.is_zero():
            raise PreconditionError("zero polynomial has no lead term")
        return self.exps[0]

    def lead_coeff(self):
        if self.is_zero():
            raise PreconditionError("zero polynomial has no lead term")
        return int(self.coeffs[0])

    def total_degree(self):
        if self.is_zero():
            return -1
        return int(self.exps.sum(axis=1).max())

    def degree_in(self, i):
        if self.is_zero():
            return -1
        return int(self.exps[:, i].max())

    def constant_coeff(self):
        if len(self.coeffs) and not self.exps[-1].any():
            return int(self.coeffs[-1])
        return 0

    def variables_used(self):
        if self.is_zero():
            return set()
        present = self.exps.max(axis=0) > 0
        return {self.ring.variables[i] for i in np.flatnonzero(present)}

    def monic(self):
        if self.is_zero():
            return self
        lc = self.lead_coeff()
        if lc == 1:
            return self
        inv = pow(lc, self.ring.p - 2, self.ring.p)
        return self * inv

    # ---- arithmetic ----------------------------------------------------

    def _check(self, other):
        if self.ring != other.ring:
            raise RingMismatchError("polynomials over different rings")

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        self._check(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        r = self.ring
        e, c = kernels.merge(
            self.exps, self.coeffs, other.exps, other.coeffs, r.p, r.ocode, r.osplit
        )
        return Polynomial(r, e, c)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        if self.is_zero():
            return self
        r = self.ring
        e, c = kernels.scale(
            self.exps, self.coeffs, np.zeros(r.nvars, dtype=np.int64), r.p - 1, r.p
        )
        return Polynomial(r, np.ascontiguousarray(e), np.ascontiguousarray(c))

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        return self.__add__(other.__neg__())

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        r = self.ring
        if isinstance(other, int):
            e, c = kernels.scale(
                self.exps, self.coeffs, np.zeros(r.nvars, dtype=np.int64), other % r.p, r.p
            )
            return Polynomial(r, np.ascontiguousarray(e), np.ascontiguousarray(c))
        self._check(other)
        try:
            e, c = kernels.multiply(
                self.exps, self.coeffs, other.exps, other.coeffs, r.p, r.ocode, r.osplit
            )
        except OverflowError as exc:
            raise ExponentOverflowError(str(exc)) from None
        return Polynomial(r, e, c)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k):
        k = int(k)
        if k < 0:
            raise PreconditionError("negative polynomial power")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base_needed = k >> 1
            if base_needed:
                base = base * base
            k >>= 1
        return result

    def mul_term(self, mono, coeff):
        """Multiply by coeff * x^mono (mono an exponent vector)."""
        r = self.ring
        try:
            e, c = kernels.scale(
                self.exps, self.coeffs, np.asarray(mono, dtype=np.int64), coeff, r.p
            )
        except OverflowError as exc:
            raise ExponentOverflowError(str(exc)) from None
        return Polynomial(r, np.ascontiguousarray(e), np.ascontiguousarray(c))

    def add_scaled(self, other, mono, coeff):
        """self + coeff * x^mono * other in one kernel round trip."""
        r = self.ring
        try:
            se, sc = kernels.scale(
                other.exps, other.coeffs, np.asarray(mono, dtype=np.int64), coeff, r.p
            )
        except OverflowError as exc:
            raise ExponentOverflowError(str(exc)) from None
        e, c = kernels.merge(
            self.exps, self.coeffs, se, sc, r.p, r.ocode, r.osplit
        )
        return Polynomial(r, np.ascontiguousarray(e), np.ascontiguousarray(c))

    # ---- comparisons ---------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.ring == other.ring
            and self.coeffs.shape == other.coeffs.shape
            and bool(np.array_equal(self.coeffs, other.coeffs))
            and bool(np.array_equal(self.exps, other.exps))
        )

    def __hash__(self):
        return hash((self.ring, self.exps.tobytes(), self.coeffs.tobytes()))

    def __bool__(self):
        return not self.is_zero()

    # ---- characteristic-p operations ------------------------------------

    def frobenius_power(self, e):
        """Return f^(p^e), computed termwise; Frobenius is additive over F_p."""
        e = int(e)
        if e < 1:
            raise PreconditionError("Frobenius level must be >= 1")
        q = self.ring.p ** e
        if self.is_zero():
            return self
        if int(self.exps.max()) * q > kernels.MAX_EXP:
            raise ExponentOverflowError("p^e-th power exceeds exponent range")
        return Polynomial(
            self.ring, np.ascontiguousarray(self.exps * q), self.coeffs.copy()
        )

    def substitute(self, images):
        """Image under the ring endomorphism sending each variable to images[i]."""
        r = self.ring
        if len(images) != r.nvars:
            raise PreconditionError("assignment must cover every variable")
        for g in images:
            if g.ring != r:
                raise RingMismatchError("substitution images over a different ring")
        acc = r.zero()
        pow_cache = {}
        for row, c in zip(self.exps, self.coeffs):
            term = r.constant(c)
            for i, a in enumerate(row):
                a = int(a)
                if a == 0:
                    continue
                key = (i, a)
                if key not in pow_cache:
                    pow_cache[key] = images[i] ** a
                term = term * pow_cache[key]
            acc = acc + term
        return acc

    def derivative(self, i):
        """Formal partial derivative with respect to variable i."""
        if self.is_zero():
            return self
        mask = self.exps[:, i] > 0
        if not mask.any():
            return self.ring.zero()
        e = self.exps[mask].copy()
        c = (self.coeffs[mask] * (e[:, i] % self.ring.p)) % self.ring.p
        e[:, i] -= 1
        return self.ring.poly(e, c)

    def canonical_key(self):
        """Tuple sorting polynomials by the active order, term by term."""
        from .kernels import numpy_backend

        if self.is_zero():
            return ((),)
        r = self.ring
        keys = numpy_backend.sort_keys(self.exps, r.ocode, r.osplit)
        return tuple(
            tuple(int(v) for v in row) + (int(c),)
            for row, c in zip(keys, self.coeffs)
        )

    # ---- canonical text form ---------------------------------------------

    def __str__(self):
        if self.is_zero():
            return "0"
        names = self.ring.variables
        parts = []
        for row, c in zip(self.exps, self.coeffs):
            factors = []
            if c != 1 or not row.any():
                factors.append(str(int(c)))
            for i, a in enumerate(row):
                if a == 0:
                    continue
                factors.append(names[i] if a == 1 else f"{names[i]}^{int(a)}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"<{self} over F_{self.ring.p}[{','.join(self.ring.variables)}]>"


def map_to_ring(f, target, positions):
    """Re-express f in ``target``; positions[i] is the target column of
    source variable i, or None if the variable must not occur."""
    if target.p != f.ring.p:
        raise RingMismatchError("target ring has a different characteristic")
    exps = np.zeros((len(f.coeffs), target.nvars), dtype=np.int64)
    for i, j in enumerate(positions):
        if j is None:
            if len(f.coeffs) and f.exps[:, i].any():
                raise PreconditionError(
                    f"variable {f.ring.variables[i]} has no image in target ring"
                )
        else:
            exps[:, j] = f.exps[:, i]
    return target.poly(exps, f.coeffs.copy())


def transfer(f, target):
    """Map f to a ring whose variable set contains f's, matching by name."""
    positions = []
    for v in f.ring.variables:
        positions.append(target._var_index.get(v))
        if positions[-1] is None and f.degree_in(f.ring._var_index[v]) > 0:
            raise PreconditionError(f"variable {v} missing from target ring")
    return map_to_ring(f, target, positions)


# ---- parsing --------------------------------------------------------------


def _tokenize(text):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("int", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*^()":
            tokens.append((ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", col=i)
    tokens.append(("end", "", len(text)))
    return tokens


class _PolyParser:
    def __init__(self, ring, tokens):
        self.ring = ring
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self, kind=None):
        tok = self.tokens[self.pos]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind}, found {tok[1]!r}", col=tok[2])
        self.pos += 1
        return tok

    def parse_expr(self):
        sign = 1
        if self.peek()[0] in ("+", "-"):
            sign = -1 if self.take()[0] == "-" else 1
        acc = self.parse_term() * sign
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            t = self.parse_term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def parse_term(self):
        acc = self.parse_factor()
        while self.peek()[0] == "*":
            self.take()
            acc = acc * self.parse_factor()
        return acc

    def parse_factor(self):
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.take("int")
            return base ** int(tok[1])
        return base

    def parse_atom(self):
        tok = self.peek()
        if tok[0] == "-":
            self.take()
            return -self.parse_factor()
        if tok[0] == "int":
            self.take()
            return self.ring.constant(int(tok[1]))
        if tok[0] == "name":
            self.take()
            if tok[1] not in self.ring._var_index:
                raise ParseError(f"unknown identifier {tok[1]!r}", col=tok[2])
            return self.ring.variable(tok[1])
        if tok[0] == "(":
            self.take()
            inner = self.parse_expr()
            self.take(")")
            return inner
        raise ParseError(f"unexpected token {tok[1]!r}", col=tok[2])


def _parse_poly(ring, text):
    parser = _PolyParser(ring, _tokenize(text))
    result = parser.parse_expr()
    parser.take("end")
    return result


# ---- named operation aliases ------------------------------------------------


def poly_arith(op, f, g):
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise PreconditionError(f"unknown operation {op!r}")


def frobenius_power_poly(f, e):
    return f.frobenius_power(e)


def substitute(f, assignment):
    return f.substitute(assignment)
