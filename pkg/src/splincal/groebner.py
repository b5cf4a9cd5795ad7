"""Reduced Groebner bases over F_p[x1..xn] and the ideal/module arithmetic
built on top of them.

Everything downstream (Frobenius compatibility, traces, contractions)
routes its decisions through this module: membership and ideal equality via
unique reduced bases, contractions via block elimination orders, Hom
computations via module syzygies.

Buchberger runs with the two classical pair criteria and sugar-degree
selection; reduced bases are unique per (ideal, order), which makes them
usable as dictionary keys and canonical printed forms.
"""

import heapq

import numpy as np

from . import kernels
from .errors import OutOfScopeError, PreconditionError, RingMismatchError
from .poly import BLOCK, GREVLEX, MonomialOrder, PolyRing, Polynomial, map_to_ring, transfer


class _Pack:
    """Packed ragged arrays for a list of divisor polynomials."""

    def __init__(self, ring):
        self.ring = ring
        self.polys = []
        self._arrays = None

    def append(self, f):
        self.polys.append(f)
        self._arrays = None

    def arrays(self):
        if self._arrays is None:
            n = self.ring.nvars
            if self.polys:
                ge = np.concatenate([f.exps for f in self.polys])
                gc = np.concatenate([f.coeffs for f in self.polys])
            else:
                ge = np.zeros((0, n), dtype=np.int64)
                gc = np.zeros(0, dtype=np.int64)
            offs = np.zeros(len(self.polys) + 1, dtype=np.int64)
            for i, f in enumerate(self.polys):
                offs[i + 1] = offs[i] + len(f.coeffs)
            p = self.ring.p
            ginv = np.array(
                [pow(int(f.coeffs[0]), p - 2, p) for f in self.polys], dtype=np.int64
            )
            self._arrays = (
                np.ascontiguousarray(ge),
                np.ascontiguousarray(gc),
                offs,
                ginv,
            )
        return self._arrays

    def normal_form(self, f):
        if f.is_zero() or not self.polys:
            return f
        ge, gc, offs, ginv = self.arrays()
        r = self.ring
        e, c = kernels.normal_form(
            f.exps, f.coeffs, ge, gc, offs, ginv, r.p, r.ocode, r.osplit
        )
        return Polynomial(r, np.ascontiguousarray(e), np.ascontiguousarray(c))


def _lcm_exps(a, b):
    return np.maximum(a, b)


def _divides(a, b):
    return bool(np.all(a <= b))


def _divides_t(a, b):
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def buchberger(gens, ring):
    """Reduced Groebner basis of the ideal generated by ``gens`` in ``ring``.

    Returns a list of monic polynomials sorted descending by lead monomial.
    """
    basis = _Pack(ring)
    leads = []
    tdegs = []
    sugars = []

    def append(f, sugar):
        basis.append(f)
        leads.append(tuple(int(v) for v in f.lead_exps()))
        tdegs.append(f.total_degree())
        sugars.append(sugar)

    for g in gens:
        if g.ring != ring:
            g = transfer(g, ring)
        if not g.is_zero():
            g = g.monic()
            append(g, g.total_degree())
    if not basis.polys:
        return []

    heap = []
    pending = set()

    def push_pairs(j):
        lj = leads[j]
        for i in range(j):
            li = leads[i]
            lcm = tuple(map(max, li, lj))
            deg = sum(lcm)
            sugar = max(sugars[i] + deg - tdegs[i], sugars[j] + deg - tdegs[j])
            heapq.heappush(heap, (sugar, deg, i, j))
            pending.add((i, j))

    for j in range(len(basis.polys)):
        push_pairs(j)

    nvars = ring.nvars
    while heap:
        sugar, deg, i, j = heapq.heappop(heap)
        if (i, j) not in pending:
            continue
        pending.discard((i, j))
        li, lj = leads[i], leads[j]
        lcm = tuple(map(max, li, lj))
        if all(lcm[v] == li[v] + lj[v] for v in range(nvars)):
            continue  # coprime lead monomials
        skip = False
        for k in range(len(basis.polys)):
            if k == i or k == j:
                continue
            if not _divides_t(leads[k], lcm):
                continue
            a, b = (i, k) if i < k else (k, i)
            c, d = (j, k) if j < k else (k, j)
            if (a, b) not in pending and (c, d) not in pending:
                skip = True
                break
        if skip:
            continue
        fi, fj = basis.polys[i], basis.polys[j]
        lcm_arr = np.array(lcm, dtype=np.int64)
        s = fi.mul_term(lcm_arr - fi.lead_exps(), 1) - fj.mul_term(
            lcm_arr - fj.lead_exps(), 1
        )
        h = basis.normal_form(s)
        if h.is_zero():
            continue
        append(h.monic(), sugar)
        push_pairs(len(basis.polys) - 1)

    return _interreduce(basis.polys, ring)


def _interreduce(polys, ring):
    # minimalize lead monomials
    polys = sorted(polys, key=lambda f: int(f.lead_exps().sum()))
    kept = []
    for f in polys:
        if not any(_divides(g.lead_exps(), f.lead_exps()) for g in kept):
            kept.append(f)
    # tail-reduce each element against the others
    reduced = []
    for i, f in enumerate(kept):
        others = _Pack(ring)
        for j, g in enumerate(kept):
            if j != i:
                others.append(g)
        r = others.normal_form(f)
        reduced.append(r.monic())
    reduced.sort(key=lambda f: f.canonical_key(), reverse=True)
    return reduced


class GroebnerBasis:
    """A reduced basis; the unique canonical generating set under its order."""

    __slots__ = ("ring", "elements", "_pack")

    def __init__(self, ring, elements):
        self.ring = ring
        self.elements = tuple(elements)
        self._pack = _Pack(ring)
        for g in self.elements:
            self._pack.append(g)

    @property
    def order(self):
        return self.ring.order

    def normal_form(self, f):
        if f.ring != self.ring:
            f = transfer(f, self.ring)
        return self._pack.normal_form(f)

    def contains(self, f):
        return self.normal_form(f).is_zero()

    def is_unit_ideal(self):
        return len(self.elements) == 1 and self.elements[0].is_one()

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        return (
            isinstance(other, GroebnerBasis)
            and self.ring == other.ring
            and self.elements == other.elements
        )

    def __hash__(self):
        return hash((self.ring, self.elements))

    def __repr__(self):
        return "GB(" + ", ".join(str(g) for g in self.elements) + ")"


def groebner_basis(ideal, order=None):
    return ideal.groebner(order)


class Ideal:
    """An ideal of the ambient polynomial ring, given by generators.

    The zero ideal is represented by the single generator 0. A reduced
    Groebner basis under the ring's order is computed lazily and cached;
    ideal equality means identical reduced bases.
    """

    __slots__ = ("ring", "gens", "attached_decomposition", "_gb")

    def __init__(self, ring, gens, attached_decomposition=None):
        self.ring = ring
        canon = []
        for g in gens:
            if g.ring != ring:
                raise RingMismatchError("generator over a different ring")
            if not g.is_zero():
                canon.append(g)
        if not canon:
            canon = [ring.zero()]
        self.gens = tuple(canon)
        self.attached_decomposition = attached_decomposition
        self._gb = None

    # ---- structure ------------------------------------------------------

    def groebner(self, order=None):
        if order is None or order == self.ring.order:
            if self._gb is None:
                self._gb = GroebnerBasis(self.ring, buchberger(self.gens, self.ring))
                if __debug__:
                    # cached-basis sanity: the basis must reproduce the generators
                    assert all(self._gb.contains(g) for g in self.gens)
            return self._gb
        ring2 = self.ring.with_order(order)
        gens2 = [transfer(g, ring2) for g in self.gens]
        return GroebnerBasis(ring2, buchberger(gens2, ring2))

    def basis_polys(self):
        gb = self.groebner()
        if not gb.elements:
            return (self.ring.zero(),)
        return gb.elements

    def is_zero(self):
        return len(self.groebner().elements) == 0

    def is_unit(self):
        return self.groebner().is_unit_ideal()

    def is_proper(self):
        return not self.is_unit()

    def contains_poly(self, f):
        return self.groebner().contains(f)

    def contains_ideal(self, other):
        gb = self.groebner()
        return all(gb.contains(g) for g in other.gens)

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        if self.ring != other.ring:
            return False
        return self.groebner().elements == other.groebner().elements

    def __hash__(self):
        return hash((self.ring, self.groebner().elements))

    def key(self):
        """Canonical printable key: the reduced basis as strings."""
        return tuple(str(g) for g in self.basis_polys())

    def __repr__(self):
        return "(" + ", ".join(self.key()) + ")"

    # ---- arithmetic -------------------------------------------------------

    def plus(self, other):
        return Ideal(self.ring, list(self.gens) + list(other.gens))

    def times(self, other):
        gens = [a * b for a in self.gens for b in other.gens]
        return Ideal(self.ring, gens)

    def intersect(self, other):
        return ideal_intersect(self, other)

    def colon(self, other):
        return ideal_colon(self, other)

    def eliminate(self, keep):
        return eliminate(self, keep)

    def saturate(self, other):
        return saturate(self, other)

    def radical_contains(self, f):
        return radical_membership(self, f)

    def dimension(self):
        return ideal_dimension(self)

    def height(self):
        d = ideal_dimension(self)
        if d < 0:
            return self.ring.nvars + 1
        return self.ring.nvars - d

    def is_monomial(self):
        return all(g.is_monomial() for g in self.basis_polys()) and not self.is_zero()

    def minimal_primes(self):
        return minimal_primes(self)

    def with_decomposition(self, primes):
        return Ideal(self.ring, self.gens, attached_decomposition=tuple(primes))


def ideal(ring, *gens):
    return Ideal(ring, list(gens))


def _fresh_names(base, count, taken):
    names = []
    i = 0
    while len(names) < count:
        cand = f"{base}{i}"
        if cand not in taken:
            names.append(cand)
        i += 1
    return names


def _extended_ring(ring, extra_first, order=None):
    """Ring with ``extra_first`` fresh variables prepended, block order
    eliminating them unless an order is given."""
    names = _fresh_names("@v", extra_first, set(ring.variables))
    variables = tuple(names) + ring.variables
    if order is None:
        order = MonomialOrder(BLOCK, extra_first)
    return PolyRing(ring.p, variables, order), names


def _lift(f, ext, offset):
    positions = [offset + i for i in range(f.ring.nvars)]
    return map_to_ring(f, ext, positions)


def _drop_first(f, ring, count):
    positions = [None] * count + list(range(ring.nvars))
    return map_to_ring(f, ring, positions)


def ideal_intersect(I, J):
    """I with J via the t*I + (1-t)*J elimination construction."""
    if I.ring != J.ring:
        raise RingMismatchError("ideals over different rings")
    if I.is_zero() or J.is_zero():
        return Ideal(I.ring, [I.ring.zero()])
    if I.is_unit():
        return Ideal(J.ring, list(J.basis_polys()))
    if J.is_unit():
        return Ideal(I.ring, list(I.basis_polys()))
    if I.contains_ideal(J):
        return Ideal(J.ring, list(J.basis_polys()))
    if J.contains_ideal(I):
        return Ideal(I.ring, list(I.basis_polys()))
    ext, _ = _extended_ring(I.ring, 1)
    t = ext.variable(0)
    one_minus_t = ext.one() - t
    gens = [t * _lift(g, ext, 1) for g in I.basis_polys()]
    gens += [one_minus_t * _lift(g, ext, 1) for g in J.basis_polys()]
    gb = buchberger(gens, ext)
    kept = [g for g in gb if g.degree_in(0) <= 0]
    return Ideal(I.ring, [_drop_first(g, I.ring, 1) for g in kept])


def ideal_intersect_many(ideals):
    acc = None
    for J in ideals:
        acc = J if acc is None else ideal_intersect(acc, J)
    return acc


def divide_exact(f, g):
    """Quotient f/g when g divides f exactly; PreconditionError otherwise."""
    if g.is_zero():
        raise PreconditionError("division by the zero polynomial")
    ring = f.ring
    q = ring.zero()
    r = f
    ginv = pow(g.lead_coeff(), ring.p - 2, ring.p)
    while not r.is_zero():
        le, ge = r.lead_exps(), g.lead_exps()
        if not _divides(ge, le):
            raise PreconditionError("inexact polynomial division")
        mono = le - ge
        coef = (r.lead_coeff() * ginv) % ring.p
        q = q + ring.monomial(mono, coef)
        r = r - g.mul_term(mono, coef)
    return q


def ideal_colon(I, J):
    """(I : J) = {a : a*J inside I}."""
    if I.ring != J.ring:
        raise RingMismatchError("ideals over different rings")
    ring = I.ring
    nonzero = [g for g in J.basis_polys() if not g.is_zero()]
    if not nonzero:
        return Ideal(ring, [ring.one()])
    result = None
    for g in nonzero:
        part = _colon_single(I, g)
        result = part if result is None else ideal_intersect(result, part)
    return result


def _colon_single(I, g):
    ring = I.ring
    basis = I.basis_polys()
    if len(basis) == 1 and not basis[0].is_zero():
        # principal case: (f : g) = (f / gcd(f, g)); when g divides f this
        # avoids the elimination round-trip entirely
        try:
            return Ideal(ring, [divide_exact(basis[0], g)])
        except PreconditionError:
            pass
    inter = ideal_intersect(I, Ideal(ring, [g]))
    return Ideal(ring, [divide_exact(h, g) for h in inter.gens if not h.is_zero()])


def saturate(I, J):
    """I : J^infinity by iterated colon; terminates by the ascending chain."""
    current = I
    while True:
        nxt = ideal_colon(current, J)
        if nxt == current:
            return current
        current = nxt


def eliminate(I, keep):
    """Generators of the contraction of I to F_p[keep], expressed in the
    original ring. ``keep`` lists variable names or indices."""
    ring = I.ring
    keep_idx = sorted(
        ring._var_index[v] if isinstance(v, str) else int(v) for v in keep
    )
    drop_idx = [i for i in range(ring.nvars) if i not in set(keep_idx)]
    if not drop_idx:
        return Ideal(ring, list(I.gens))
    perm = drop_idx + keep_idx
    variables = tuple(ring.variables[i] for i in perm)
    ring2 = PolyRing(ring.p, variables, MonomialOrder(BLOCK, len(drop_idx)))
    positions = [perm.index(i) for i in range(ring.nvars)]
    gens2 = [map_to_ring(g, ring2, positions) for g in I.gens]
    gb = buchberger(gens2, ring2)
    kept = [g for g in gb if all(g.degree_in(i) <= 0 for i in range(len(drop_idx)))]
    back = [None] * len(drop_idx) + keep_idx
    out = [map_to_ring(g, ring, back) for g in kept]
    return Ideal(ring, out)


def preimage_under_substitution(I, images):
    """The full preimage of I under the endomorphism x_i -> images[i].

    Mirror variables carry the source copy of the ring: the ideal
    I + (mirror_i - images_i) is contracted to the mirrors, and the result
    renamed back."""
    ring = I.ring
    n = ring.nvars
    if len(images) != n:
        raise PreconditionError("one image per variable required")
    names = _fresh_names("@m", n, set(ring.variables))
    # originals first (to be eliminated), mirrors second
    variables = ring.variables + tuple(names)
    ext = PolyRing(ring.p, variables, MonomialOrder(BLOCK, n))
    gens = [map_to_ring(g, ext, list(range(n))) for g in I.gens]
    for i, img in enumerate(images):
        rel = ext.variable(n + i) - map_to_ring(img, ext, list(range(n)))
        gens.append(rel)
    gb = buchberger(gens, ext)
    kept = [g for g in gb if all(g.degree_in(i) <= 0 for i in range(n))]
    back = [None] * n + list(range(n))
    return Ideal(ring, [map_to_ring(g, ring, back) for g in kept])


def radical_membership(I, f):
    """f in sqrt(I), decided by the Rabinowitsch trick."""
    if f.is_zero():
        return True
    ext, _ = _extended_ring(I.ring, 1)
    z = ext.variable(0)
    gens = [_lift(g, ext, 1) for g in I.gens]
    gens.append(ext.one() - z * _lift(f, ext, 1))
    gb = buchberger(gens, ext)
    return len(gb) == 1 and gb[0].is_one()


def ideal_dimension(I):
    """Krull dimension of S/I via independent variable sets modulo the
    lead-term ideal of a degree-compatible basis."""
    ring = I.ring
    gb = I.groebner(MonomialOrder(GREVLEX)) if ring.order.kind != GREVLEX else I.groebner()
    if gb.is_unit_ideal():
        return -1
    supports = []
    for g in gb:
        supports.append(frozenset(int(i) for i in np.flatnonzero(g.lead_exps() > 0)))
    n = ring.nvars
    best = -1
    for mask in range(1 << n):
        u = {i for i in range(n) if mask >> i & 1}
        if len(u) <= best:
            continue
        if all(not s <= u for s in supports):
            best = len(u)
    return best


# ---- module syzygies -------------------------------------------------------


class ModuleMatrix:
    """A rectangular matrix of polynomials over one ring."""

    __slots__ = ("ring", "entries",)

    def __init__(self, ring, entries):
        self.ring = ring
        self.entries = tuple(tuple(e) for e in entries)
        width = {len(r) for r in self.entries}
        if len(width) > 1:
            raise PreconditionError("ragged module matrix")
        for row in self.entries:
            for e in row:
                if e.ring != ring:
                    raise RingMismatchError("matrix entry over a different ring")

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return len(self.entries[0]) if self.entries else 0

    def column(self, j):
        return [self.entries[i][j] for i in range(self.rows)]

    def transpose(self):
        return ModuleMatrix(
            self.ring,
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def apply(self, vec):
        out = []
        for i in range(self.rows):
            acc = self.ring.zero()
            for j in range(self.cols):
                acc = acc + self.entries[i][j] * vec[j]
            out.append(acc)
        return out

    def __repr__(self):
        return f"ModuleMatrix({self.rows}x{self.cols})"


def _mono_key(row, ring):
    """Python tuple whose natural order matches the ring's monomial order."""
    t = tuple(int(v) for v in row)
    kind = ring.order.kind
    if kind == 0:  # lex
        return t
    if kind == 1:  # grevlex
        return (sum(t),) + tuple(-v for v in reversed(t))
    k = ring.order.split
    return (
        (sum(t[:k]),)
        + tuple(-v for v in reversed(t[:k]))
        + (sum(t[k:]),)
        + tuple(-v for v in reversed(t[k:]))
    )


class _ModLead:
    """Lead term data of a module vector: rank-dominant position order."""

    __slots__ = ("rank", "key", "pos", "exps", "coeff")

    def __init__(self, rank, key, pos, exps, coeff):
        self.rank = rank
        self.key = key
        self.pos = pos
        self.exps = exps
        self.coeff = coeff

    def gt(self, other):
        if self.rank != other.rank:
            return self.rank < other.rank
        if self.key != other.key:
            return self.key > other.key
        return self.pos < other.pos


def _vec_lead(vec, ranks, ring):
    best = None
    for pos, comp in enumerate(vec):
        if comp.is_zero():
            continue
        cand = _ModLead(
            ranks[pos],
            _mono_key(comp.lead_exps(), ring),
            pos,
            tuple(int(v) for v in comp.lead_exps()),
            comp.lead_coeff(),
        )
        if best is None or cand.gt(best):
            best = cand
    return best


def _vec_sub_scaled(u, v, mono, coef, ring):
    neg = (ring.p - coef) % ring.p
    return [
        a if b.is_zero() or neg == 0 else a.add_scaled(b, mono, neg)
        for a, b in zip(u, v)
    ]


def _vec_is_zero(v):
    return all(c.is_zero() for c in v)


def _module_reduce(vec, basis, leads, ranks, ring):
    p = ring.p
    while True:
        lead = _vec_lead(vec, ranks, ring)
        if lead is None:
            return vec
        hit = None
        for bvec, blead in zip(basis, leads):
            if blead.pos == lead.pos and _divides_t(blead.exps, lead.exps):
                hit = (bvec, blead)
                break
        if hit is None:
            return vec
        bvec, blead = hit
        coef = (lead.coeff * pow(blead.coeff, p - 2, p)) % p
        mono = np.array(
            [a - b for a, b in zip(lead.exps, blead.exps)], dtype=np.int64
        )
        vec = _vec_sub_scaled(vec, bvec, mono, coef, ring)


def module_groebner(vectors, ranks, ring):
    """Buchberger for submodules of a free module with position ranks.

    Positions with smaller rank dominate the order. Returns a Groebner
    generating set (not interreduced)."""
    basis = []
    leads = []
    for v in vectors:
        if _vec_is_zero(v):
            continue
        basis.append(v)
        leads.append(_vec_lead(v, ranks, ring))
    p = ring.p
    pairs = []

    def push(i, j):
        li, lj = leads[i], leads[j]
        if li.pos != lj.pos:
            return
        lcm = tuple(map(max, li.exps, lj.exps))
        heapq.heappush(pairs, (sum(lcm), i, j))

    for j in range(len(basis)):
        for i in range(j):
            push(i, j)
    while pairs:
        _, i, j = heapq.heappop(pairs)
        li, lj = leads[i], leads[j]
        lcm = tuple(map(max, li.exps, lj.exps))
        inv_i = pow(li.coeff, p - 2, p)
        inv_j = pow(lj.coeff, p - 2, p)
        mono_i = np.array([a - b for a, b in zip(lcm, li.exps)], dtype=np.int64)
        mono_j = np.array([a - b for a, b in zip(lcm, lj.exps)], dtype=np.int64)
        u = [c if c.is_zero() else c.mul_term(mono_i, inv_i) for c in basis[i]]
        s = _vec_sub_scaled(u, basis[j], mono_j, inv_j, ring)
        s = _module_reduce(s, basis, leads, ranks, ring)
        if _vec_is_zero(s):
            continue
        basis.append(s)
        leads.append(_vec_lead(s, ranks, ring))
        k = len(basis) - 1
        for i2 in range(k):
            push(i2, k)
    return basis, leads


def syzygy_basis(M):
    """Columns generating {v : M v = 0}."""
    ring = M.ring
    r, c = M.rows, M.cols
    vectors = []
    for j in range(c):
        vec = M.column(j) + [ring.one() if i == j else ring.zero() for i in range(c)]
        vectors.append(vec)
    ranks = [0] * r + [1] * c
    basis, _ = module_groebner(vectors, ranks, ring)
    cols = []
    for v in basis:
        if all(v[i].is_zero() for i in range(r)):
            cols.append(v[r:])
    if not cols:
        return ModuleMatrix(ring, [[ring.zero()] for _ in range(c)] if c else [])
    return ModuleMatrix(ring, [[col[i] for col in cols] for i in range(c)])


def kernel_mod_ideal(M, I):
    """Columns v with M v = 0 componentwise modulo I."""
    ring = M.ring
    if I.ring != ring:
        raise RingMismatchError("matrix and ideal over different rings")
    r, c = M.rows, M.cols
    igens = [g for g in I.gens if not g.is_zero()]
    aug = []
    for i in range(r):
        row = list(M.entries[i])
        for k in range(r):
            for g in igens:
                row.append(g if k == i else ring.zero())
        aug.append(row)
    syz = syzygy_basis(ModuleMatrix(ring, aug))
    cols = []
    for j in range(syz.cols):
        col = [syz.entries[i][j] for i in range(c)]
        if not _vec_is_zero(col):
            cols.append(col)
    if not cols:
        return ModuleMatrix(ring, [[ring.zero()] for _ in range(c)] if c else [])
    return ModuleMatrix(ring, [[col[i] for col in cols] for i in range(c)])


def module_relations(target_monomials, J, ring_ext, base_positions, base_ring):
    """Relations over the base ring among residues of ``target_monomials``.

    Returns generators of {(c_a) in base^s : sum c_a * m_a in J}, where J is
    an ideal of ``ring_ext`` and the c_a must involve only the base-ring
    variables (given by ``base_positions`` inside ring_ext).
    """
    gb = buchberger(list(J.gens), ring_ext)
    s = len(target_monomials)
    vectors = []
    for g in gb:
        vectors.append([g] + [ring_ext.zero()] * s)
    for a, m in enumerate(target_monomials):
        vec = [m] + [ring_ext.zero()] * s
        vec[1 + a] = ring_ext.one()
        vectors.append(vec)
    ranks = [0] + [1] * s
    basis, _ = module_groebner(vectors, ranks, ring_ext)
    drop = [i for i in range(ring_ext.nvars) if i not in set(base_positions)]
    rel = []
    for v in basis:
        if not v[0].is_zero():
            continue
        comps = v[1:]
        if any(any(c.degree_in(i) > 0 for i in drop) for c in comps):
            continue
        back = []
        pos_map = [None] * ring_ext.nvars
        for bi, pe in enumerate(base_positions):
            pos_map[pe] = bi
        rel.append([map_to_ring(c, base_ring, pos_map) for c in comps])
    return rel


# ---- univariate factorization (Cantor-Zassenhaus) ---------------------------


def _uni_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _uni_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _uni_trim(out)


def _uni_divmod(a, b, p):
    a = list(a)
    if not b:
        raise ZeroDivisionError
    inv = pow(b[-1], p - 2, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b) and _uni_trim(a):
        if len(a) < len(b):
            break
        c = a[-1] * inv % p
        d = len(a) - len(b)
        q[d] = c
        for i, y in enumerate(b):
            a[d + i] = (a[d + i] - c * y) % p
        _uni_trim(a)
    return _uni_trim(q), _uni_trim(a)


def _uni_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        a, b = b, _uni_divmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], p - 2, p)
        a = [x * inv % p for x in a]
    return a


def _uni_powmod(a, e, mod, p):
    result = [1]
    base = _uni_divmod(a, mod, p)[1]
    while e:
        if e & 1:
            result = _uni_divmod(_uni_mul(result, base, p), mod, p)[1]
        e >>= 1
        if e:
            base = _uni_divmod(_uni_mul(base, base, p), mod, p)[1]
    return result


def _uni_deriv(a, p):
    return _uni_trim([(i * a[i]) % p for i in range(1, len(a))])


def _uni_pth_root(a, p):
    # a is a polynomial in x^p; coefficients are Frobenius-fixed in F_p
    return [a[i] for i in range(0, len(a), p)]


def _uni_monic(a, p):
    a = _uni_trim(list(a))
    if not a:
        return a
    inv = pow(a[-1], p - 2, p)
    return [x * inv % p for x in a]


def uni_radical(a, p):
    """Product of the distinct monic irreducible factors of a."""
    a = _uni_monic(a, p)
    if len(a) <= 1:
        return [1]
    d = _uni_deriv(a, p)
    if not d:
        return uni_radical(_uni_pth_root(a, p), p)
    g = _uni_gcd(a, d, p)
    w = _uni_divmod(a, g, p)[0]
    rest = a
    while True:
        h = _uni_gcd(rest, w, p)
        if len(h) <= 1:
            break
        rest = _uni_divmod(rest, h, p)[0]
    if len(rest) <= 1:
        return w
    return _uni_mul(w, uni_radical(rest, p), p)


def uni_factor(a, p, seed=0):
    """Distinct monic irreducible factors of a (multiplicities dropped)."""
    sf = uni_radical(a, p)
    factors = []
    _distinct_degree_split(sf, p, factors, seed)
    factors.sort(key=lambda f: (len(f), f))
    return factors


def _uni_sub(a, b, p):
    n = max(len(a), len(b))
    out = [0] * n
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out[i] = (x - y) % p
    return _uni_trim(out)


def _distinct_degree_split(f, p, out, seed):
    import random

    rng = random.Random(hash((seed, tuple(f), p)))
    f = _uni_monic(f, p)
    if len(f) <= 1:
        return
    x = [0, 1]
    h = list(x)
    d = 0
    while len(f) > 2:
        d += 1
        if 2 * d > len(f) - 1:
            break
        h = _uni_powmod(h, p, f, p)
        g = _uni_gcd(_uni_sub(h, x, p), f, p)
        if len(g) > 1:
            _equal_degree_split(g, d, p, out, rng)
            f = _uni_divmod(f, g, p)[0]
            h = _uni_divmod(h, f, p)[1]
    if len(f) > 1:
        out.append(_uni_monic(f, p))


def _equal_degree_split(f, d, p, out, rng):
    if len(f) - 1 == d:
        out.append(_uni_monic(f, p))
        return
    while True:
        a = _uni_trim([rng.randrange(p) for _ in range(len(f) - 1)])
        if len(a) <= 1:
            continue
        if p == 2:
            t = list(a)
            acc = list(a)
            for _ in range(d - 1):
                acc = _uni_powmod(acc, 2, f, p)
                t = _uni_sub(t, [(-c) % p for c in acc], p)
            g = _uni_gcd(t, f, p)
        else:
            e = (p ** d - 1) // 2
            b = _uni_powmod(a, e, f, p)
            g = _uni_gcd(_uni_sub(b, [1], p), f, p)
        if 1 < len(g) < len(f):
            _equal_degree_split(g, d, p, out, rng)
            _equal_degree_split(_uni_divmod(f, g, p)[0], d, p, out, rng)
            return


def poly_to_univariate(f, i):
    """Dense coefficient list of f as a univariate polynomial in variable i."""
    coeffs = [0] * (f.degree_in(i) + 1)
    for row, c in zip(f.exps, f.coeffs):
        others = row.sum() - row[i]
        if others:
            raise PreconditionError("polynomial is not univariate")
        coeffs[int(row[i])] = int(c)
    return coeffs


def univariate_to_poly(coeffs, ring, i):
    exps = []
    cs = []
    for d, c in enumerate(coeffs):
        if c % ring.p:
            row = np.zeros(ring.nvars, dtype=np.int64)
            row[i] = d
            exps.append(row)
            cs.append(c)
    if not exps:
        return ring.zero()
    return ring.poly(np.array(exps), np.array(cs))


# ---- minimal primes (scoped) ------------------------------------------------


LINEAR_SEARCH_LIMIT = 300000


def minimal_primes(I):
    """Minimal primes of a proper ideal, within the supported scope:
    attached certified decompositions, monomial ideals, and ideals with at
    most 3 effective variables that are principal or zero-dimensional after
    substituting out linearly-presented variables."""
    if I.is_unit():
        raise PreconditionError("minimal primes of the unit ideal requested")
    if I.attached_decomposition is not None:
        return _verify_decomposition(I)
    primes = _min_primes_inner(I)
    primes = _minimalize(primes)
    primes.sort(key=lambda P: P.key())
    return primes


def _verify_decomposition(I):
    primes = list(I.attached_decomposition)
    ring = I.ring
    for P in primes:
        if P.ring != ring:
            raise PreconditionError("decomposition over a different ring", code="INVALID_DECOMPOSITION")
    prod = None
    for P in primes:
        prod = P if prod is None else prod.times(P)
    if not I.contains_ideal(prod):
        raise PreconditionError(
            "product of claimed primes not inside the ideal", code="INVALID_DECOMPOSITION"
        )
    for P in primes:
        if not P.contains_ideal(I):
            raise PreconditionError(
                "ideal not inside every claimed prime", code="INVALID_DECOMPOSITION"
            )
    for i, P in enumerate(primes):
        for j, Q in enumerate(primes):
            if i != j and P.contains_ideal(Q):
                raise PreconditionError(
                    "claimed primes are comparable", code="INVALID_DECOMPOSITION"
                )
    return primes


def _min_primes_inner(I):
    ring = I.ring
    if I.is_zero():
        return [Ideal(ring, [ring.zero()])]
    simple, relations = _eliminate_linear_vars(I)
    sring = simple.ring

    def lift_back(P):
        gens = [g for g in P.basis_polys() if not g.is_zero()]
        return Ideal(ring, gens + relations + [ring.zero()])

    if simple.is_zero():
        return [lift_back(Ideal(sring, [sring.zero()]))]
    if simple.is_monomial():
        return [lift_back(P) for P in _monomial_min_primes(simple)]
    eff = set()
    for g in simple.basis_polys():
        eff |= g.variables_used()
    if len(eff) > 3:
        raise OutOfScopeError(
            "minimal primes outside supported scope: "
            f"{len(eff)} effective variables and not monomial"
        )
    basis = simple.basis_polys()
    if len(basis) == 1:
        return [lift_back(P) for P in _principal_min_primes(simple, basis[0])]
    if simple.dimension() == 0:
        return [lift_back(P) for P in _zero_dim_min_primes(simple)]
    raise OutOfScopeError(
        "minimal primes outside supported scope: positive-dimensional, "
        "non-principal, non-monomial ideal without a certified decomposition"
    )


def _eliminate_linear_vars(I):
    """Substitute away variables x with a basis element c*x - h, c a unit
    constant and h free of x; returns the simplified ideal (same ring) and
    the substitution relations used."""
    ring = I.ring
    current = I
    relations = []
    banned = set()
    while True:
        basis = current.basis_polys()
        if len(basis) == 1 and basis[0].is_zero():
            break
        sub = None
        for g in basis:
            for i in range(ring.nvars):
                if i in banned or g.degree_in(i) != 1:
                    continue
                mask = g.exps[:, i] == 1
                rows = g.exps[mask]
                if len(rows) != 1 or rows[0].sum() != 1:
                    continue
                c = int(g.coeffs[mask][0])
                inv = pow(c, ring.p - 2, ring.p)
                rest = ring.poly(g.exps[~mask].copy(), g.coeffs[~mask].copy())
                h = -(rest * inv)
                sub = (i, h, g)
                break
            if sub:
                break
        if not sub:
            break
        i, h, g = sub
        images = [ring.variable(k) for k in range(ring.nvars)]
        images[i] = h
        gens = [f.substitute(images) for f in current.gens]
        relations.append(g)
        banned.add(i)
        current = Ideal(ring, gens)
    return current, relations


def _monomial_min_primes(I):
    ring = I.ring
    supports = [frozenset(int(i) for i in np.flatnonzero(g.lead_exps() > 0)) for g in I.basis_polys()]

    def covers(sups):
        if not sups:
            return [frozenset()]
        s = min(sups, key=len)
        out = []
        for v in sorted(s):
            rest = [t for t in sups if v not in t]
            out.extend(c | {v} for c in covers(rest))
        return out

    cands = covers(supports)
    minimal = [c for c in cands if not any(o < c for o in cands)]
    primes = []
    seen = set()
    for c in minimal:
        key = tuple(sorted(c))
        if key in seen:
            continue
        seen.add(key)
        primes.append(Ideal(ring, [ring.variable(i) for i in key]))
    return primes


def _principal_min_primes(I, f):
    ring = I.ring
    eff = sorted(ring._var_index[v] for v in f.variables_used())
    if len(eff) == 1:
        coeffs = poly_to_univariate(f, eff[0])
        factors = uni_factor(coeffs, ring.p)
        return [Ideal(ring, [univariate_to_poly(fac, ring, eff[0])]) for fac in factors]
    if f.total_degree() > 3:
        raise OutOfScopeError(
            "principal ideal of degree > 3 in several variables: factorization "
            "not attempted"
        )
    space = 0
    for k in range(len(eff)):
        space += ring.p ** (len(eff) - k)
    if space > LINEAR_SEARCH_LIMIT:
        raise OutOfScopeError(
            "linear-factor search space too large for this characteristic"
        )
    primes = []
    g = f
    for ell in _linear_forms(ring, eff):
        divided = False
        while True:
            try:
                g2 = divide_exact(g, ell)
            except PreconditionError:
                break
            g = g2
            divided = True
        if divided:
            primes.append(Ideal(ring, [ell]))
        if g.is_constant():
            break
    if not g.is_constant():
        primes.append(Ideal(ring, [g.monic()]))
    return primes


def _linear_forms(ring, eff):
    """All monic-normalized linear forms in the given variables."""
    p = ring.p
    for lead_pos, i in enumerate(eff):
        tail = eff[lead_pos + 1 :]
        counts = p ** (len(tail) + 1)
        for code in range(counts):
            c = code
            poly = ring.variable(i)
            for j in tail:
                poly = poly + ring.variable(j) * (c % p)
                c //= p
            poly = poly + ring.constant(c % p)
            yield poly


def _staircase(gb, ring):
    lead = [g.lead_exps() for g in gb]
    bounds = []
    for i in range(ring.nvars):
        pure = [int(l[i]) for l in lead if int(l.sum()) == int(l[i])]
        if not pure:
            return None
        bounds.append(min(pure))
    out = []

    def rec(prefix):
        if len(prefix) == ring.nvars:
            row = np.array(prefix, dtype=np.int64)
            if not any(_divides(l, row) for l in lead):
                out.append(row)
            return
        for e in range(bounds[len(prefix)]):
            rec(prefix + [e])

    rec([])
    out.sort(key=lambda r: (int(r.sum()), tuple(int(v) for v in r)))
    return out


def _zero_dim_min_primes(I, depth=0):
    """Minimal primes of a zero-dimensional ideal by the splitting method:
    factor the minimal polynomial of a random residue and recurse on each
    factor until every branch is certified maximal."""
    ring = I.ring
    p = ring.p
    if I.is_unit():
        return []
    if depth > 24:
        raise OutOfScopeError("zero-dimensional splitting recursion exhausted")
    work_ring = ring.with_order(MonomialOrder(GREVLEX))
    gbb = I.groebner(MonomialOrder(GREVLEX))
    stair = _staircase(list(gbb), work_ring)
    if stair is None:
        raise OutOfScopeError("ideal is not zero-dimensional")
    dim = len(stair)
    if dim == 1:
        return [Ideal(ring, list(I.gens))]
    index = {tuple(int(v) for v in row): k for k, row in enumerate(stair)}

    def coords(f):
        vec = np.zeros(dim, dtype=np.int64)
        for row, c in zip(f.exps, f.coeffs):
            vec[index[tuple(int(v) for v in row)]] = int(c)
        return vec

    import random

    from .poly import stable_seed

    rng = random.Random(stable_seed("zerodim", I.key(), depth))
    for attempt in range(25):
        r = work_ring.zero()
        for row in stair:
            r = r + work_ring.monomial(row, rng.randrange(p))
        if r.is_constant():
            continue
        # minimal polynomial of r modulo I via linear dependence of its powers
        power = work_ring.one()
        vecs = [coords(power)]
        minpoly = None
        for _ in range(dim):
            power = gbb.normal_form(power * r)
            vecs.append(coords(power))
            A = np.array(vecs, dtype=np.int64).T
            ns = modp_nullspace(A, p)
            if ns.shape[1]:
                minpoly = [int(c) for c in ns[:, 0]]
                break
        if minpoly is None:
            continue
        minpoly = _uni_trim(list(minpoly))
        factors = uni_factor(minpoly, p)
        if len(factors) == 1 and len(factors[0]) == len(minpoly):
            if len(factors[0]) - 1 == dim:
                return [Ideal(ring, list(I.gens))]  # residue ring is a field
            continue  # r generates a proper subfield; retry
        out = []
        for fac in factors:
            q_eval = _uni_eval_at_poly(fac, r, work_ring)
            J = Ideal(ring, list(I.gens) + [transfer(q_eval, ring)])
            if J.is_unit():
                continue
            out.extend(_zero_dim_min_primes(J, depth + 1))
        return _minimalize(out)
    raise OutOfScopeError("zero-dimensional splitting did not converge")


def _uni_eval_at_poly(coeffs, r, ring):
    acc = ring.zero()
    power = ring.one()
    for c in coeffs:
        if c:
            acc = acc + power * int(c)
        power = power * r
    return acc


def _minimalize(primes):
    out = []
    for P in primes:
        if any(P != Q and P.contains_ideal(Q) for Q in primes):
            continue
        if all(P != Q for Q in out):
            out.append(P)
    return out


# ---- dense linear algebra mod p --------------------------------------------


def modp_rref(A, p):
    """Row-reduced echelon form of an integer matrix mod p; returns
    (matrix, pivot column list)."""
    A = np.array(A, dtype=np.int64) % p
    rows, cols = A.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        pivot = None
        for i in range(r, rows):
            if A[i, c] % p:
                pivot = i
                break
        if pivot is None:
            continue
        A[[r, pivot]] = A[[pivot, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = A[r] * inv % p
        for i in range(rows):
            if i != r and A[i, c]:
                A[i] = (A[i] - A[i, c] * A[r]) % p
        pivots.append(c)
        r += 1
    return A, pivots


def modp_nullspace(A, p):
    """Columns spanning the kernel of A over F_p."""
    A = np.array(A, dtype=np.int64) % p
    rows, cols = A.shape
    R, pivots = modp_rref(A, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((cols, len(free)), dtype=np.int64)
    for k, fc in enumerate(free):
        basis[fc, k] = 1
        for r, pc in enumerate(pivots):
            basis[pc, k] = (-R[r, fc]) % p
    return basis
