"""Frobenius bracket powers and roots, F-purity witnesses, compatibility
of ideals under a fixed p^-1-linear map, and Frobenius closure.

Conventions: a quotient ring R = S/I0 is always presented with its
distinguished maximal ideal m = (all variables). Ideals of R are handled as
ideals of S containing I0. A splitting witness u parametrizes the map
"premultiply by u, then apply the trace generator of Hom(F_*S, S)"; an
ideal J >= I0 is compatible with it exactly when u*J lies in J^[p].
"""

from dataclasses import dataclass, field
from math import comb
import random

import numpy as np

from .errors import OutOfScopeError, PreconditionError, RingMismatchError
from .groebner import (
    Ideal,
    ideal_colon,
    ideal_dimension,
    ideal_intersect,
    ideal_intersect_many,
    minimal_primes,
    preimage_under_substitution,
)
from .poly import stable_seed

_VERIFY_THREADS = 1


def configurable_verify_threads(n):
    """Thread count for embarrassingly parallel verification passes.

    All algebra objects are immutable once built, so candidates can be
    re-checked concurrently; results do not depend on the setting."""
    global _VERIFY_THREADS
    _VERIFY_THREADS = max(1, int(n))
    return _VERIFY_THREADS


class QuotientRing:
    """R = S/I0, local at the ideal generated by all the variables."""

    def __init__(self, ring, defining):
        if defining.ring != ring:
            raise RingMismatchError("defining ideal over a different ring")
        self.ring = ring
        self.defining = defining
        gb = defining.groebner()
        if gb.is_unit_ideal():
            raise PreconditionError("defining ideal is the unit ideal")
        for g in gb:
            if g.constant_coeff() != 0:
                raise PreconditionError(
                    "defining ideal is not contained in the maximal ideal at the origin"
                )
        self._domain_flag = None
        self._domain_known = False

    @property
    def p(self):
        return self.ring.p

    def maximal_ideal(self):
        return Ideal(self.ring, [self.ring.variable(i) for i in range(self.ring.nvars)])

    def nf(self, f):
        return self.defining.groebner().normal_form(f)

    def is_zero_in_quotient(self, f):
        return self.nf(f).is_zero()

    def domain_flag(self):
        """True/False when primality of I0 is decided, None when the scoped
        check cannot decide."""
        if not self._domain_known:
            try:
                primes = minimal_primes(self.defining)
                self._domain_flag = len(primes) == 1 and primes[0] == self.defining
            except OutOfScopeError:
                self._domain_flag = None
            self._domain_known = True
        return self._domain_flag

    def require_domain(self):
        if self.domain_flag() is not True:
            raise PreconditionError(
                "operation requires a certified domain quotient", code="DOMAIN_REQUIRED"
            )

    def dimension(self):
        return ideal_dimension(self.defining)

    def jacobian_ideal(self):
        """Ideal of height-sized minors of the Jacobian of I0, plus I0.

        For the zero ideal the empty minor is 1, matching the smooth case.
        """
        gens = [g for g in self.defining.basis_polys() if not g.is_zero()]
        h = self.defining.height() if gens else 0
        if h == 0 or not gens:
            return Ideal(self.ring, [self.ring.one()])
        n = self.ring.nvars
        jac = [[g.derivative(j) for j in range(n)] for g in gens]
        minors = []
        from itertools import combinations

        for rows in combinations(range(len(gens)), h):
            for cols in combinations(range(n), h):
                sub = [[jac[r][c] for c in cols] for r in rows]
                minors.append(_det(sub, self.ring))
        return Ideal(self.ring, minors + list(self.defining.gens))

    def key(self):
        return (self.ring.p, self.ring.variables, self.defining.key())

    def __eq__(self, other):
        return isinstance(other, QuotientRing) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"F_{self.p}[{','.join(self.ring.variables)}]/{self.defining!r}"


def _det(matrix, ring):
    n = len(matrix)
    if n == 0:
        return ring.one()
    if n == 1:
        return matrix[0][0]
    acc = ring.zero()
    for j in range(n):
        sub = [row[:j] + row[j + 1 :] for row in matrix[1:]]
        term = matrix[0][j] * _det(sub, ring)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


class SplittingWitness:
    """An element u of S with u in (I0^[p] : I0) and u outside m^[p].

    Both conditions are checked at construction; they are exactly what
    makes "multiply by u, then trace" a surjective p^-1-linear map of the
    quotient, so that compatibility with it is meaningful."""

    def __init__(self, qring, u, provenance="user"):
        if u.ring != qring.ring:
            raise RingMismatchError("witness over a different ring")
        self.qring = qring
        self.u = u
        self.e = 1
        self.provenance = provenance
        colon = ideal_colon(
            frobenius_power_ideal(qring.defining, 1), qring.defining
        )
        if not colon.contains_poly(u):
            raise PreconditionError(
                "witness fails the colon condition u * I0 <= I0^[p]",
                code="INVALID_WITNESS",
            )
        if _bracket_maximal(qring).contains_poly(u):
            raise PreconditionError(
                "witness lies in m^[p], so it induces no splitting at the origin",
                code="INVALID_WITNESS",
            )

    def __repr__(self):
        return f"witness({self.u})"


def _bracket_maximal(qring, e=1):
    ring = qring.ring
    q = qring.p ** e
    return Ideal(ring, [ring.variable(i) ** q for i in range(ring.nvars)])


def frobenius_power_ideal(I, e):
    """The bracket power I^[p^e], generated by p^e-th powers of generators."""
    ring = I.ring
    gens = [g.frobenius_power(e) for g in I.basis_polys() if not g.is_zero()]
    if not gens:
        return Ideal(ring, [ring.zero()])
    return Ideal(ring, gens)


def frobenius_root(J, e):
    """Smallest ideal K with J <= K^[p^e].

    Each generator decomposes over the monomial basis x^a, a in [0, p^e)^n,
    with p^e-th-power cofactors; the cofactors generate the root. Over F_p
    every coefficient is its own p^e-th root."""
    ring = J.ring
    e = int(e)
    if e < 1:
        raise PreconditionError("Frobenius root level must be >= 1")
    q = ring.p ** e
    gens = [g for g in J.gens if not g.is_zero()]
    if not gens:
        return Ideal(ring, [ring.zero()])
    parts = {}
    for g in gens:
        if q > (1 << 62):
            # every exponent is below q, so all cofactors are constants
            return Ideal(ring, [ring.one()])
        buckets = {}
        residues = g.exps % q
        cof = g.exps // q
        for row, co, c in zip(residues, cof, g.coeffs):
            key = tuple(int(v) for v in row)
            buckets.setdefault(key, []).append((co, int(c)))
        for key, terms in buckets.items():
            exps = np.array([t[0] for t in terms], dtype=np.int64)
            coeffs = np.array([t[1] for t in terms], dtype=np.int64)
            part = ring.poly(exps, coeffs)
            parts[str(part)] = part
    return Ideal(ring, sorted(parts.values(), key=lambda f: f.canonical_key()))


@dataclass
class FedderResult:
    fpure: bool
    witness: object = None


def fedder_fpure(qring):
    """Fedder's criterion at the origin: F-pure iff (I0^[p] : I0) is not
    inside m^[p]; a witness is any colon generator outside m^[p]."""
    I0 = qring.defining
    if I0.is_zero():
        u = qring.ring.product_of_variables() ** (qring.p - 1)
        return FedderResult(True, SplittingWitness(qring, u, provenance="fedder-auto"))
    colon = ideal_colon(frobenius_power_ideal(I0, 1), I0)
    mp = _bracket_maximal(qring)
    gb = mp.groebner()
    for g in colon.basis_polys():
        if not gb.contains(g):
            return FedderResult(
                True, SplittingWitness(qring, g, provenance="fedder-auto")
            )
    return FedderResult(False, None)


def compatible_test(witness, J, e=1):
    """u-compatibility of J >= I0 at level e: u^(1+p+..+p^(e-1)) * J <= J^[p^e]."""
    qring = witness.qring
    if J.ring != qring.ring:
        raise RingMismatchError("ideal over a different ring")
    if not J.contains_ideal(qring.defining):
        raise PreconditionError("ideal does not contain the defining ideal")
    if e < 1:
        raise PreconditionError("compatibility level must be >= 1")
    p = qring.p
    exponent = sum(p ** i for i in range(e))
    u_e = witness.u ** exponent
    target = frobenius_power_ideal(J, e).groebner()
    return all(target.contains(u_e * g) for g in J.basis_polys())


def star_closure(witness, J):
    """Least witness-compatible ideal containing J (and I0): the least fixed
    point of K -> K + root(u*K); terminates by the ascending chain."""
    qring = witness.qring
    ring = qring.ring
    K = J.plus(qring.defining)
    for _ in range(500):
        gb = K.groebner()
        basis = K.basis_polys()
        scaled = Ideal(ring, [witness.u * g for g in basis])
        root = frobenius_root(scaled, 1)
        new = [g for g in root.gens if not g.is_zero() and not gb.contains(g)]
        if not new:
            return K
        K = Ideal(ring, list(basis) + new)
    raise PreconditionError("star closure did not stabilize")


@dataclass
class SmallestCompatibleResult:
    ideal: Ideal
    verified: bool
    probes: int = 0


def smallest_nonzero_compatible(witness, qring, seed=None, probes=8):
    """Candidate smallest nonzero compatible ideal by seed-and-verify.

    The candidate is the intersection of star closures of I0 + (g) over the
    seed generators (default: Jacobian ideal of I0 plus I0); verification
    checks that star closures of pseudo-random nonzero elements all contain
    the candidate. A False flag means minimality was not certified."""
    qring.require_domain()
    ring = qring.ring
    I0 = qring.defining
    if seed is None:
        seed = qring.jacobian_ideal()
    keep = [g for g in seed.basis_polys() if not qring.is_zero_in_quotient(g)]
    if not keep:
        raise PreconditionError("seed ideal is zero in the quotient", code="ZERO_SEED")
    stars = [star_closure(witness, I0.plus(Ideal(ring, [g]))) for g in keep]
    candidate = ideal_intersect_many(stars)
    rng = random.Random(stable_seed("smallest", qring.key(), str(witness.u)))
    verified = True
    for _ in range(probes):
        h = _random_unit_element(ring, rng)
        closure = star_closure(witness, I0.plus(Ideal(ring, [h])))
        if not closure.contains_ideal(candidate):
            verified = False
            break
    return SmallestCompatibleResult(candidate, verified, probes)


def _random_unit_element(ring, rng):
    # nonzero constant term keeps the element outside every lattice prime
    # contained in m, which is where degenerate star directions live
    h = ring.constant(rng.randrange(1, ring.p))
    for i in range(ring.nvars):
        c = rng.randrange(ring.p)
        if c:
            h = h + ring.variable(i) * c
        c2 = rng.randrange(ring.p)
        if c2:
            h = h + ring.variable(i) * ring.variable(rng.randrange(ring.nvars)) * c2
    return h


@dataclass
class CompatibleLattice:
    """The finite family of witness-compatible ideals found by worklist
    closure, together with inclusion edges and prime/coheight labels."""

    qring: QuotientRing
    ideals: list
    edges: list
    prime_flags: list
    coheights: list
    complete: bool
    warnings: list = field(default_factory=list)

    def size(self):
        return len(self.ideals)

    def coheight_prime_counts(self):
        counts = {}
        for flag, d in zip(self.prime_flags, self.coheights):
            if flag and d is not None:
                counts[d] = counts.get(d, 0) + 1
        return counts

    def binomial_bound_ok(self):
        v = self.qring.ring.nvars
        return all(c <= comb(v, d) for d, c in self.coheight_prime_counts().items())


def enumerate_compatible(witness, qring):
    """Worklist closure of the compatible-ideal lattice.

    Starts from the star closure of I0 and the unit ideal; repeatedly adds
    compatible minimal primes of members, pairwise intersections, star
    closures of pairwise sums, and smallest-nonzero-compatible pullbacks of
    prime members, until stable. Completeness is downgraded (not failed)
    when a minimality certificate does not verify."""
    ring = qring.ring
    I0 = qring.defining
    members = {}
    warnings = []
    complete = True

    def add(J):
        key = J.key()
        if key in members:
            return False
        members[key] = J
        return True

    add(star_closure(witness, I0))
    # the distinguished maximal ideal seeds the local part of the lattice;
    # its star closure is compatible whether or not m itself is
    add(star_closure(witness, qring.maximal_ideal()))
    add(Ideal(ring, [ring.one()]))

    primes_done = set()
    quotients_done = set()
    prime_members = {}

    for _round in range(64):
        changed = False
        snapshot = list(members.values())
        # (a) compatible minimal primes of members
        for J in snapshot:
            key = J.key()
            if key in primes_done or J.is_unit():
                continue
            primes_done.add(key)
            for P in minimal_primes(J):
                if compatible_test(witness, P):
                    prime_members[P.key()] = P
                    changed |= add(P)
        # (b) pairwise intersections
        snapshot = list(members.values())
        for i in range(len(snapshot)):
            for j in range(i + 1, len(snapshot)):
                changed |= add(ideal_intersect(snapshot[i], snapshot[j]))
        # (c) star closures of pairwise sums
        snapshot = list(members.values())
        for i in range(len(snapshot)):
            for j in range(i + 1, len(snapshot)):
                changed |= add(star_closure(witness, snapshot[i].plus(snapshot[j])))
        # (d) smallest-nonzero pullbacks over prime members
        for P in list(prime_members.values()):
            pkey = P.key()
            if pkey in quotients_done or P.is_unit():
                continue
            quotients_done.add(pkey)
            if any(g.constant_coeff() != 0 for g in P.basis_polys()):
                # the prime is not contained in the distinguished maximal
                # ideal, so its quotient has no local presentation here
                complete = False
                if "NONLOCAL_PRIME_SKIPPED" not in warnings:
                    warnings.append("NONLOCAL_PRIME_SKIPPED")
                continue
            certified = Ideal(ring, P.gens)
            certified = certified.with_decomposition([certified])
            quotient = QuotientRing(ring, certified)
            wit = SplittingWitness(quotient, witness.u, provenance=witness.provenance)
            res = smallest_nonzero_compatible(wit, quotient)
            if not res.verified:
                complete = False
                if "UNVERIFIED_MINIMALITY" not in warnings:
                    warnings.append("UNVERIFIED_MINIMALITY")
            changed |= add(star_closure(witness, P.plus(res.ideal)))
        if not changed:
            break
    else:
        raise PreconditionError("compatible-ideal closure did not stabilize")

    ideals = sorted(members.values(), key=lambda J: (len(J.key()), J.key()))
    if _VERIFY_THREADS > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=_VERIFY_THREADS) as pool:
            checks = list(pool.map(lambda J: compatible_test(witness, J), ideals))
    else:
        checks = [compatible_test(witness, J) for J in ideals]
    if not all(checks):
        raise PreconditionError(
            "internal: lattice member failed compatibility re-verification"
        )
    prime_flags = []
    coheights = []
    for J in ideals:
        flag = J.key() in prime_members
        if not flag and not J.is_unit():
            try:
                mp = minimal_primes(J)
                flag = len(mp) == 1 and mp[0] == J
            except OutOfScopeError:
                flag = None
        if J.is_unit():
            flag = False
        prime_flags.append(flag)
        coheights.append(ideal_dimension(J) if flag else None)
    edges = []
    for i, A in enumerate(ideals):
        for j, B in enumerate(ideals):
            if i != j and B.contains_ideal(A) and A != B:
                edges.append((i, j))
    return CompatibleLattice(
        qring, ideals, edges, prime_flags, coheights, complete, warnings
    )


@dataclass
class FrobeniusClosureResult:
    closure: Ideal
    stabilized_at: object
    levels: list


def frobenius_closure(qring, I, e_max=4):
    """Frobenius closure of the image of I in R = S/I0.

    Level e collects {r : r^(p^e) in I^[p^e] + I0} via the substitution
    preimage under x_i -> x_i^(p^e); valid over F_p since coefficients are
    Frobenius-fixed. The chain is increasing; stabilized_at reports the
    first e with C_(e+1) = C_e, or None if the cap was reached first."""
    ring = qring.ring
    if I.ring != ring:
        raise RingMismatchError("ideal over a different ring")
    if e_max < 1:
        raise PreconditionError("e_max must be >= 1")
    levels = []
    stabilized = None
    prev = None
    for e in range(1, e_max + 1):
        q = qring.p ** e
        target = frobenius_power_ideal(I, e).plus(qring.defining)
        images = [ring.variable(i) ** q for i in range(ring.nvars)]
        level = preimage_under_substitution(target, images)
        level = level.plus(qring.defining)
        levels.append(level)
        if prev is not None and level == prev:
            stabilized = e - 1
            break
        prev = level
    closure = levels[-1] if stabilized is None else levels[stabilized - 1]
    return FrobeniusClosureResult(closure, stabilized, levels)
