"""Finite ring extensions of a quotient ring: module-finiteness
certificates, contractions, trace ideals via Hom computations, ideal-trace
sampling, generic-etaleness witnesses, trace chains and splinter-locus
obstruction reports.

An extension B = A[t1..tk]/(relations) is handled through two presentations
of the same ideal: the user-facing ring (base variables first) and an
internal ring with the adjoined block dominant, whose Groebner basis yields
the module staircase over A.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import OutOfScopeError, PreconditionError, RingMismatchError
from .frobenius import QuotientRing, compatible_test, fedder_fpure
from .groebner import (
    Ideal,
    ModuleMatrix,
    _divides,
    _uni_deriv,
    _uni_gcd,
    _uni_trim,
    eliminate,
    ideal_colon,
    ideal_dimension,
    ideal_intersect_many,
    kernel_mod_ideal,
    minimal_primes,
    module_relations,
    poly_to_univariate,
    radical_membership,
)
from .poly import BLOCK, MonomialOrder, PolyRing, transfer


@dataclass
class FinitenessCertificate:
    """Leading-term staircase proof that B is a finite A-module."""

    pure_power_degrees: dict
    module_generators: tuple  # staircase monomials in the dominant ring, 1 first
    torder_basis: object


class FiniteExtension:
    """B = A[t1..tk]/(relations), presented over the base quotient A."""

    def __init__(self, base, adjoined, relations, name="B"):
        self.base = base
        self.name = name
        self.adjoined = tuple(adjoined)
        if not set(self.adjoined).isdisjoint(base.ring.variables):
            raise PreconditionError("adjoined variable collides with a base variable")
        p = base.ring.p
        self.ring = PolyRing(p, base.ring.variables + self.adjoined)
        k = len(self.adjoined)
        self.torder_ring = PolyRing(
            p,
            self.adjoined + base.ring.variables,
            MonomialOrder(BLOCK, k) if k else base.ring.order,
        )
        rels = []
        for r in relations:
            if r.ring != self.ring:
                raise RingMismatchError("relation over the wrong presentation ring")
            rels.append(r)
        self.relations = tuple(rels)
        lifted = [transfer(g, self.ring) for g in base.defining.gens]
        self.full_ideal = Ideal(self.ring, list(rels) + lifted)
        self._certificate = None
        self._trace = None
        self._domain_flag = None
        self._domain_known = False

    @property
    def tcount(self):
        return len(self.adjoined)

    def torder_ideal(self):
        gens = [transfer(g, self.torder_ring) for g in self.full_ideal.gens]
        return Ideal(self.torder_ring, gens)

    def domain_flag(self):
        if not self._domain_known:
            self._domain_flag = _ideal_is_prime(self.full_ideal)
            self._domain_known = True
        return self._domain_flag

    def require_domain(self):
        if self.domain_flag() is not True:
            raise PreconditionError(
                "extension is not a certified domain", code="DOMAIN_REQUIRED"
            )

    def certificate(self):
        if self._certificate is None:
            self._certificate = verify_module_finite(self)
        return self._certificate

    def __repr__(self):
        rels = ", ".join(str(r) for r in self.relations)
        return f"{self.name} = adjoin({', '.join(self.adjoined)}) / ({rels})"


def _ideal_is_prime(I):
    try:
        primes = minimal_primes(I)
    except OutOfScopeError:
        return None
    return len(primes) == 1 and primes[0] == I


def verify_module_finite(ext):
    """Certificate that B is a finitely generated A-module.

    Under the adjoined-block order, each adjoined variable must contribute a
    pure-power lead monomial; the staircase below the adjoined-only lead
    monomials gives the module generators, with 1 first."""
    tring = ext.torder_ring
    k = ext.tcount
    gb = ext.torder_ideal().groebner()
    if gb.is_unit_ideal():
        raise PreconditionError("extension collapses to the zero ring")
    tlead = []
    for g in gb:
        lead = g.lead_exps()
        if not lead[k:].any():
            tlead.append(tuple(int(v) for v in lead[:k]))
    bounds = {}
    for i, t in enumerate(ext.adjoined):
        pure = [l[i] for l in tlead if sum(l) == l[i]]
        if not pure:
            raise PreconditionError(
                f"no pure power of {t} in the lead ideal: not module-finite",
                code="NOT_MODULE_FINITE",
            )
        bounds[t] = min(pure)
    stair = []

    def rec(prefix):
        if len(prefix) == k:
            if not any(_divides(np.array(l), np.array(prefix)) for l in tlead):
                stair.append(tuple(prefix))
            return
        for e in range(bounds[ext.adjoined[len(prefix)]]):
            rec(prefix + [e])

    rec([])
    stair.sort(key=lambda s: (sum(s), s))
    gens = []
    for s in stair:
        exps = np.zeros(tring.nvars, dtype=np.int64)
        exps[:k] = s
        gens.append(tring.monomial(exps))
    if ext.base.domain_flag() is True and ext.domain_flag() is True:
        contracted = _contract_to_base(ext, [])
        if contracted != ext.base.defining:
            raise PreconditionError(
                "base does not inject into the extension", code="NOT_INJECTIVE"
            )
    return FinitenessCertificate(bounds, tuple(gens), gb)


def _contract_to_base(ext, extra_base_gens):
    """Eliminate the adjoined block from full_ideal + lifted extras and
    express the result in the base ring."""
    base_ring = ext.base.ring
    ring = ext.ring
    gens = list(ext.full_ideal.gens)
    gens += [transfer(g, ring) for g in extra_base_gens]
    elim = eliminate(Ideal(ring, gens), list(base_ring.variables))
    out = [transfer(g, base_ring) for g in elim.gens if not g.is_zero()]
    out += list(ext.base.defining.gens)
    return Ideal(base_ring, out)


def contract_ideal(ext, I):
    """The contraction I*B intersected with A, as an ideal of S containing I0."""
    ext.certificate()
    if I.ring != ext.base.ring:
        raise RingMismatchError("ideal over a different ring than the base")
    return _contract_to_base(ext, [g for g in I.gens if not g.is_zero()])


def trace_ideal(ext):
    """Image of evaluation-at-1 on Hom_A(B, A).

    The A-module presentation of B on the staircase generators has its
    relation vectors computed by module elimination; Hom elements are the
    kernel of the transposed presentation modulo I0, and the trace collects
    their first coordinates (the values at the generator 1)."""
    if ext._trace is not None:
        return ext._trace
    cert = ext.certificate()
    base_ring = ext.base.ring
    tring = ext.torder_ring
    k = ext.tcount
    base_positions = list(range(k, tring.nvars))
    rel_vectors = module_relations(
        list(cert.module_generators),
        ext.torder_ideal(),
        tring,
        base_positions,
        base_ring,
    )
    I0 = ext.base.defining
    if not rel_vectors:
        tau = Ideal(base_ring, [base_ring.one()])
    else:
        M = ModuleMatrix(base_ring, rel_vectors)
        hom = kernel_mod_ideal(M, I0)
        firsts = [hom.entries[0][j] for j in range(hom.cols)]
        tau = Ideal(base_ring, firsts + list(I0.gens))
    ext._trace = tau
    return tau


def split_check(ext):
    """A is a direct summand of B exactly when the trace is the unit ideal."""
    return trace_ideal(ext).is_unit()


def is_m_primary(qring, I):
    """I + I0 primary to the distinguished maximal ideal."""
    J = I.plus(qring.defining)
    if J.is_unit():
        return False
    if ideal_dimension(J) != 0:
        return False
    ring = qring.ring
    return all(
        radical_membership(J, ring.variable(i)) for i in range(ring.nvars)
    )


def ideal_trace_sample(ext, family):
    """Upper approximation of the ideal trace: the intersection of
    (I : IB cap A) over the sampled family. Contains the trace ideal for
    any family; non-primary members only widen the approximation and are
    flagged with a warning."""
    if not family:
        raise PreconditionError("sample family must be nonempty")
    qring = ext.base
    warnings = []
    parts = []
    for I in family:
        if not is_m_primary(qring, I):
            warnings.append(f"family member {I!r} is not primary to the maximal ideal")
        C = contract_ideal(ext, I)
        parts.append(ideal_colon(I.plus(qring.defining), C))
    result = ideal_intersect_many(parts)
    return result, warnings


def default_sample_family(qring, depth=3):
    ring = qring.ring
    m = [ring.variable(i) for i in range(ring.nvars)]
    family = []
    current = m
    for _ in range(depth):
        family.append(Ideal(ring, current))
        current = [a * b for a in current for b in m]
    return family


@dataclass
class EtaleCertificate:
    verdict: bool
    determinant: object = None
    relation_choice: tuple = ()


def verify_generically_etale(ext):
    """Jacobian witness that Frac(A) -> Frac(B) is separable: some maximal
    minor of the relation Jacobian in the adjoined variables avoids every
    minimal prime (Rabinowitsch nonvanishing modulo the relations)."""
    ext.base.require_domain()
    ext.require_domain()
    k = ext.tcount
    if k == 0:
        return EtaleCertificate(True, ext.ring.one(), ())
    ring = ext.ring
    base_n = ext.base.ring.nvars
    rels = ext.relations
    if len(rels) < k:
        raise PreconditionError("fewer relations than adjoined variables")
    jac = [[r.derivative(base_n + i) for i in range(k)] for r in rels]
    from .frobenius import _det

    for rows in combinations(range(len(rels)), k):
        sub = [jac[r] for r in rows]
        det = _det(sub, ring)
        if det.is_zero():
            continue
        if not radical_membership(ext.full_ideal, det):
            return EtaleCertificate(True, det, rows)
    return EtaleCertificate(False, None, ())


def is_radical_scoped(I):
    """True/False when radicality is decided by a scoped certificate
    (monomial, principal, or zero-dimensional); None when undecided."""
    ring = I.ring
    if I.is_unit() or I.is_zero():
        return True
    basis = I.basis_polys()
    if I.is_monomial():
        return all(bool((g.lead_exps() <= 1).all()) for g in basis)
    if len(basis) == 1:
        f = basis[0]
        gens = [f] + [f.derivative(i) for i in range(ring.nvars)]
        sing = Ideal(ring, [g for g in gens if not g.is_zero()])
        return ideal_dimension(sing) <= ring.nvars - 2
    if ideal_dimension(I) == 0:
        for i in range(ring.nvars):
            elim = eliminate(I, [v for v in range(ring.nvars) if v == i])
            uni = [g for g in elim.basis_polys() if not g.is_zero()]
            if not uni:
                return None
            coeffs = poly_to_univariate(uni[0], i)
            d = _uni_deriv(coeffs, ring.p)
            if not d:
                if len(_uni_trim(list(coeffs))) > 1:
                    return False
                continue
            if len(_uni_gcd(coeffs, d, ring.p)) > 1:
                return False
        return True
    return None


@dataclass
class TraceReport:
    """Per-extension traces along a chain plus the derived verdict data."""

    qring: QuotientRing
    fpure: bool
    extensions: list = field(default_factory=list)
    traces: list = field(default_factory=list)
    splits: list = field(default_factory=list)
    stabilized_at: object = None
    obstruction: object = None
    verdict: str = ""
    radical_flag: object = None
    compatible_flags: dict = field(default_factory=dict)
    sample_containment: object = None
    warnings: list = field(default_factory=list)
    notes: list = field(default_factory=list)


def _check_chain_inclusions(chain):
    for a, b in zip(chain, chain[1:]):
        if not set(a.adjoined) <= set(b.adjoined):
            raise PreconditionError(
                f"{a.name} adjoins variables missing from {b.name}",
                code="INCLUSION_UNCERTIFIED",
            )
        target = b.full_ideal.groebner()
        for r in a.relations:
            if not target.contains(transfer(r, b.ring)):
                raise PreconditionError(
                    f"relation {r} of {a.name} does not map into {b.name}",
                    code="INCLUSION_UNCERTIFIED",
                )


def trace_chain(qring, chain):
    """Traces along a certified chain of extensions: weak descent is
    verified, the first stabilization index is reported, and the last trace
    is the obstruction ideal."""
    report = TraceReport(qring=qring, fpure=True)
    ring = qring.ring
    if not chain:
        report.obstruction = Ideal(ring, [ring.one()])
        report.verdict = "EMPTY_CHAIN"
        report.stabilized_at = None
        return report
    _check_chain_inclusions(chain)
    traces = [trace_ideal(b) for b in chain]
    for i, (t1, t2) in enumerate(zip(traces, traces[1:])):
        if not t1.contains_ideal(t2):
            raise PreconditionError(
                f"traces do not descend between {chain[i].name} and {chain[i+1].name}"
            )
    report.extensions = [b.name for b in chain]
    report.traces = traces
    report.splits = [t.is_unit() for t in traces]
    report.stabilized_at = None
    for i in range(len(traces) - 1):
        if traces[i] == traces[i + 1]:
            report.stabilized_at = i + 1
            break
    report.obstruction = traces[-1]
    return report


def splinter_report(qring, chain, witnesses=()):
    """Obstruction report for the splinter property of A.

    Verdicts: NON_SPLINTER_AT_MAXIMAL when F-purity fails (a splinter must
    be F-pure); CERTIFIED_NON_SPLINTER_ON_LOCUS with the vanishing locus of
    the obstruction ideal when some chain trace is proper (traces localize,
    so non-splitting persists at every prime containing the obstruction);
    NO_OBSTRUCTION_FOUND otherwise. Positive verdicts are never issued."""
    fed = fedder_fpure(qring)
    if not fed.fpure:
        report = TraceReport(qring=qring, fpure=False)
        report.obstruction = qring.maximal_ideal()
        report.verdict = "NON_SPLINTER_AT_MAXIMAL"
        report.warnings.append("NOT_FPURE")
        report.radical_flag = is_radical_scoped(report.obstruction)
        report.notes.append(
            "the quotient is not F-pure at the distinguished maximal ideal, "
            "and a splinter of prime characteristic must be F-pure"
        )
        return report
    report = trace_chain(qring, chain)
    tau = report.obstruction
    if tau.is_unit():
        report.verdict = "NO_OBSTRUCTION_FOUND"
        if chain:
            report.notes.append(
                "every chain trace is the unit ideal: the base is a direct "
                "summand of each supplied extension; no obstruction found "
                "(positive splinter verdicts are outside this tool's scope)"
            )
    else:
        report.verdict = "CERTIFIED_NON_SPLINTER_ON_LOCUS"
        report.notes.append(
            "the base fails to be a direct summand in a finite extension; "
            "the failure localizes to every prime containing the obstruction ideal"
        )
    report.radical_flag = is_radical_scoped(tau)
    for w in witnesses:
        key = str(w.u)
        report.compatible_flags[key] = compatible_test(w, tau.plus(qring.defining))
    if chain:
        sample, warn = ideal_trace_sample(chain[-1], default_sample_family(qring))
        report.warnings.extend(warn)
        report.sample_containment = sample.contains_ideal(tau)
    return report
