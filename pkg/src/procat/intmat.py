"""Exact integer matrix algebra: Smith normal form, kernels, lattice quotients.

Matrices are lists of rows of Python ints, so every computation is carried
out in arbitrary precision.  This module is the arithmetic backend for
homology, cohomology with finite coefficients, and induced maps on both.
"""

from __future__ import annotations

from dataclasses import dataclass


def identity_matrix(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zero_matrix(rows, cols):
    return [[0] * cols for _ in range(rows)]


def mat_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    if a and len(a[0]) != inner:
        raise ValueError("dimension mismatch in mat_mul")
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        oi = out[i]
        for k in range(inner):
            v = ai[k]
            if v:
                bk = b[k]
                for j in range(cols):
                    oi[j] += v * bk[j]
    return out


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def transpose(a):
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def mat_eq(a, b):
    return a == b


def smith_normal_form(a):
    """Return ``(d, p, q)`` with ``p @ a @ q = d``, ``p``/``q`` unimodular.

    ``d`` is diagonal with nonnegative entries forming a divisibility chain
    d[0] | d[1] | ... (zeros trail).
    """
    m = [row[:] for row in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    p = identity_matrix(rows)
    q = identity_matrix(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        p[i], p[j] = p[j], p[i]

    def swap_cols(i, j):
        for r in m:
            r[i], r[j] = r[j], r[i]
        for r in q:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):
        # row dst += c * row src
        mr, pr = m[src], p[src]
        for j in range(cols):
            m[dst][j] += c * mr[j]
        for j in range(rows):
            p[dst][j] += c * pr[j]

    def add_col(src, dst, c):
        for r in m:
            r[dst] += c * r[src]
        for r in q:
            r[dst] += c * r[src]

    def negate_row(i):
        m[i] = [-x for x in m[i]]
        p[i] = [-x for x in p[i]]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # locate pivot: smallest |entry| in the remaining block
        pivot = None
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                v = m[i][j]
                if v and (best is None or abs(v) < best):
                    best = abs(v)
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        # clear row and column t; reductions can refill, so loop
        while True:
            dirty = False
            for i in range(t + 1, rows):
                if m[i][t]:
                    c = m[i][t] // m[t][t]
                    add_row(t, i, -c)
                    if m[i][t]:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if m[t][j]:
                    c = m[t][j] // m[t][t]
                    add_col(t, j, -c)
                    if m[t][j]:
                        swap_cols(t, j)
                        dirty = True
            if not dirty:
                break
        # enforce divisibility d_t | m[i][j] on the rest of the block
        offender = None
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if m[i][j] % m[t][t]:
                    offender = (i, j)
                    break
            if offender:
                break
        if offender:
            add_row(offender[0], t, 1)
            continue  # redo the pivot step at the same t
        if m[t][t] < 0:
            negate_row(t)
        t += 1
    return m, p, q


def diagonal_of(d):
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def rank(a):
    d, _, _ = smith_normal_form(a)
    return sum(1 for x in diagonal_of(d) if x)


def kernel_basis(a, cols=None):
    """Integer basis (list of column vectors) of ``{x : a x = 0}``."""
    if cols is None:
        cols = len(a[0]) if a else 0
    if not a or not a[0]:
        return [[1 if i == j else 0 for i in range(cols)] for j in range(cols)]
    d, _, q = smith_normal_form(a)
    diag = diagonal_of(d)
    r = sum(1 for x in diag if x)
    qt = transpose(q)
    return [qt[j] for j in range(r, cols)]


def solve(a, b):
    """One integer solution ``x`` of ``a x = b``, or ``None``."""
    rows = len(a)
    cols = len(a[0]) if a else 0
    if rows == 0:
        return [0] * cols
    d, p, q = smith_normal_form(a)
    pb = mat_vec(p, b)
    diag = diagonal_of(d)
    y = [0] * cols
    for i in range(rows):
        di = diag[i] if i < len(diag) else 0
        if di:
            if pb[i] % di:
                return None
            y[i] = pb[i] // di
        elif pb[i]:
            return None
    return mat_vec(q, y)


def column_stack(blocks):
    """Concatenate matrices horizontally (all with the same row count)."""
    rows = 0
    for b in blocks:
        if b:
            rows = len(b)
            break
    out = [[] for _ in range(rows)]
    for b in blocks:
        if not b:
            continue
        for i in range(rows):
            out[i].extend(b[i])
    return out


def matrix_from_columns(cols, rows):
    out = [[0] * len(cols) for _ in range(rows)]
    for j, c in enumerate(cols):
        for i in range(rows):
            out[i][j] = c[i]
    return out


@dataclass(frozen=True)
class FinAbGroup:
    """Finitely generated abelian group in invariant-factor form.

    ``invariant_factors`` is an ascending divisibility chain of ints >= 2;
    ``rank`` counts free summands.
    """

    invariant_factors: tuple
    rank: int = 0

    def __post_init__(self):
        for f in self.invariant_factors:
            if f < 2:
                raise ValueError("invariant factors must be >= 2")
        for a, b in zip(self.invariant_factors, self.invariant_factors[1:]):
            if b % a:
                raise ValueError("invariant factors must form a divisibility chain")
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")

    @staticmethod
    def from_cyclic_factors(factors, rank=0):
        """Canonicalize an arbitrary list of cyclic orders into invariant factors."""
        primary = {}
        for f in factors:
            if f < 1:
                raise ValueError("cyclic factors must be positive")
            if f == 1:
                continue
            for prime, e in _factorint(f).items():
                primary.setdefault(prime, []).append(e)
        depth = max((len(v) for v in primary.values()), default=0)
        invs = []
        for k in range(depth):
            f = 1
            for prime, exps in primary.items():
                exps_sorted = sorted(exps, reverse=True)
                if k < len(exps_sorted):
                    f *= prime ** exps_sorted[k]
            invs.append(f)
        return FinAbGroup(tuple(sorted(invs)), rank)

    @staticmethod
    def trivial():
        return FinAbGroup((), 0)

    @staticmethod
    def cyclic(n):
        if n == 0:
            return FinAbGroup((), 1)
        return FinAbGroup.from_cyclic_factors([n])

    @property
    def order(self):
        """Group order, or None for infinite groups."""
        if self.rank:
            return None
        n = 1
        for f in self.invariant_factors:
            n *= f
        return n

    def is_trivial(self):
        return not self.invariant_factors and not self.rank

    def generators(self):
        """Orders of the chosen generators: invariant factors then 0 per free rank."""
        return list(self.invariant_factors) + [0] * self.rank

    def elements(self):
        """All elements as coordinate tuples (finite groups only)."""
        if self.rank:
            raise ValueError("infinite group")
        coords = [range(f) for f in self.invariant_factors]
        out = [()]
        for c in coords:
            out = [t + (v,) for t in out for v in c]
        return out

    def reduce(self, vec):
        out = []
        gens = self.generators()
        for v, g in zip(vec, gens):
            out.append(v % g if g else v)
        return tuple(out)

    def __str__(self):
        parts = [f"Z/{f}" for f in self.invariant_factors] + ["Z"] * self.rank
        return " + ".join(parts) if parts else "0"


def _factorint(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def cokernel(a, ambient_rank):
    """``Z^ambient_rank / columnspace(a)`` as a FinAbGroup."""
    if not a or not a[0]:
        return FinAbGroup((), ambient_rank)
    d, _, _ = smith_normal_form(a)
    diag = [x for x in diagonal_of(d) if x]
    return FinAbGroup.from_cyclic_factors([x for x in diag if x > 1],
                                          ambient_rank - len(diag))


class LatticeQuotient:
    """Quotient L/M of a sublattice L of Z^n by a sublattice M of L.

    Stores coordinates so that classes of vectors can be computed and
    homomorphisms between quotients expressed on canonical generators.
    """

    def __init__(self, l_basis, m_generators, n):
        # l_basis: list of column vectors spanning L (must be a basis)
        # m_generators: list of column vectors generating M, each in L
        self.n = n
        self.l_basis = l_basis
        lmat = matrix_from_columns(l_basis, n)
        coords = []
        for g in m_generators:
            c = solve(lmat, g)
            if c is None:
                raise ValueError("relation generator not inside the lattice")
            coords.append(c)
        k = len(l_basis)
        rel = matrix_from_columns(coords, k) if coords else zero_matrix(k, 0)
        d, p, _ = smith_normal_form(rel) if coords else (zero_matrix(k, 0), identity_matrix(k), [])
        self._lmat = lmat
        self._p = p
        diag = diagonal_of(d) if coords else []
        diag = diag + [0] * (k - len(diag))
        self._diag = diag
        # generator i of the quotient corresponds to row i of p^{-1}
        self.gen_orders = [diag[i] for i in range(k)]
        factors = [x for x in self.gen_orders if x > 1]
        free = sum(1 for x in self.gen_orders if x == 0)
        self.group = FinAbGroup.from_cyclic_factors(factors, free)

    def class_of(self, vec):
        """Coordinates of ``vec`` (in Z^n, must lie in L) in generator coords."""
        c = solve(self._lmat, vec)
        if c is None:
            raise ValueError("vector not inside the lattice")
        w = mat_vec(self._p, c)
        out = []
        for i, o in enumerate(self.gen_orders):
            out.append(w[i] % o if o else w[i])
        return tuple(out)

    def nontrivial_positions(self):
        return [i for i, o in enumerate(self.gen_orders) if o != 1]

    def canonical_class(self, vec):
        """Class coordinates aligned with ``self.group.generators()``:
        torsion coordinates in invariant-factor order, then free ones."""
        cls = self.class_of(vec)
        torsion = [(o, c) for o, c in zip(self.gen_orders, cls) if o > 1]
        free = [c for o, c in zip(self.gen_orders, cls) if o == 0]
        return tuple(c for _, c in torsion) + tuple(free)

    def canonical_generators(self):
        """Ambient vectors lifting the generators, aligned like canonical_class."""
        vs = self.generator_vectors()
        torsion = [v for o, v in zip(self.gen_orders, vs) if o > 1]
        free = [v for o, v in zip(self.gen_orders, vs) if o == 0]
        return torsion + free

    def generator_vectors(self):
        """Ambient Z^n vectors lifting the quotient generators."""
        k = len(self.l_basis)
        pinv = _unimodular_inverse(self._p)
        gens = []
        for i in range(k):
            col = [pinv[r][i] for r in range(k)]
            gens.append(mat_vec(self._lmat, col))
        return gens

    def is_zero_class(self, vec):
        cls = self.class_of(vec)
        return all(c == 0 for i, c in enumerate(cls) if self.gen_orders[i] != 1)


def _unimodular_inverse(p):
    n = len(p)
    d, pp, qq = smith_normal_form(p)
    diag = diagonal_of(d)
    if any(abs(x) != 1 for x in diag) or len(diag) < n:
        raise ValueError("matrix is not unimodular")
    # p^{-1} = q @ d^{-1} @ pp  with d = pp @ p @ qq
    dinv = [[(1 if d[i][i] == 1 else -1) if i == j else 0 for j in range(n)] for i in range(n)]
    return mat_mul(mat_mul(qq, dinv), pp)


def preimage_lattice_basis(b, m, n):
    """Basis of ``{x in Z^n : b x == 0 mod m}`` (full rank n)."""
    rows = len(b)
    if rows == 0 or n == 0 or not b[0]:
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    stacked = [b[i][:] + [m if j == i else 0 for j in range(rows)] for i in range(rows)]
    ker = kernel_basis(stacked, n + rows)
    return [k[:n] for k in ker]


def mod_m_quotient(incoming, outgoing, n, m):
    """Homology at Z^n of ... -> Z^q --incoming--> Z^n --outgoing--> ... mod m.

    Returns a LatticeQuotient for ker(outgoing mod m)/im(incoming mod m).
    """
    l_basis = preimage_lattice_basis(outgoing, m, n)
    mgens = []
    if incoming and incoming[0]:
        q = len(incoming[0])
        for j in range(q):
            mgens.append([incoming[i][j] for i in range(n)])
    for i in range(n):
        mgens.append([m if r == i else 0 for r in range(n)])
    return LatticeQuotient(l_basis, mgens, n)


def integral_quotient(incoming, outgoing, n):
    """Integral homology at Z^n: ker(outgoing)/im(incoming) as LatticeQuotient."""
    if outgoing and outgoing[0]:
        l_basis = kernel_basis(outgoing, n)
    else:
        l_basis = [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    mgens = []
    if incoming and incoming[0]:
        q = len(incoming[0])
        for j in range(q):
            mgens.append([incoming[i][j] for i in range(n)])
    return LatticeQuotient(l_basis, mgens, n)
