"""Truncated and coskeletal simplicial sets with exact homotopy invariants.

The data model stores finitely many levels together with a declared
coskeletal level ``n``; levels above the stored range are materialized on
demand as compatible families over the n-truncations of standard simplices.
All decision procedures (Kan, minimality, homotopy groups, homology) are
finite searches over stored or materialized levels.

Simplex names are arbitrary hashable values.  Simplicial operators are
monotone maps represented as tuples ``(op(0), ..., op(a))`` acting on the
right: ``apply_op(k, x, op)`` is the simplex ``x . op`` for ``op: [a] -> [k]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .intmat import FinAbGroup, integral_quotient, mod_m_quotient
from .abelian import AbHom


DEFAULT_LEVEL_BUDGET = 200_000


class BudgetExceeded(Exception):
    """A requested enumeration exceeded the configured simplex budget."""


class InvalidSimplicialData(Exception):
    """A simplicial identity or coskeletal invariant failed."""


def _name_key(x):
    return (x.__class__.__name__, repr(x))


def monotone_maps(a, b):
    """All monotone maps [a] -> [b] as value tuples."""
    out = []

    def rec(prefix, lo):
        if len(prefix) == a + 1:
            out.append(tuple(prefix))
            return
        for v in range(lo, b + 1):
            rec(prefix + [v], v)

    rec([], 0)
    return out


def monotone_surjections(a, b):
    return [m for m in monotone_maps(a, b) if len(set(m)) == b + 1]


def compose_ops(outer, inner):
    """(outer o inner)(j) = outer[inner[j]]."""
    return tuple(outer[v] for v in inner)


def delta_op(i, n):
    """The injection [n-1] -> [n] missing i."""
    return tuple(v for v in range(n + 1) if v != i)


def sigma_op(i, n):
    """The surjection [n+1] -> [n] hitting i twice."""
    return tuple(v if v <= i else v - 1 for v in range(n + 2))


def _subsets_for_family(k, n):
    """Nonempty subsets of [k] of size <= n+1, ordered by (size, lex)."""
    out = []
    for size in range(1, min(k + 1, n + 1) + 1):
        out.extend(itertools.combinations(range(k + 1), size))
    return out


class SimplicialData:
    """Levels 0..top of a simplicial set with face and degeneracy tables."""

    def __init__(self, simplices, faces, degens, check=True):
        self.simplices = [list(lev) for lev in simplices]
        self.faces = {k: dict(v) for k, v in faces.items()}
        self.degens = {k: dict(v) for k, v in degens.items()}
        self._index = [
            {x: i for i, x in enumerate(lev)} for lev in self.simplices
        ]
        self._ez_cache = {}
        self._face_key_cache = {}
        if check:
            self.validate_identities()

    @property
    def top(self):
        return len(self.simplices) - 1

    def level(self, k):
        if k > self.top:
            raise IndexError(f"level {k} not stored (top={self.top})")
        return self.simplices[k]

    def has(self, k, x):
        return 0 <= k <= self.top and x in self._index[k]

    def face(self, k, i, x):
        return self.faces[(k, i)][x]

    def degen(self, k, i, x):
        return self.degens[(k, i)][x]

    def all_faces(self, k, x):
        return tuple(self.faces[(k, i)][x] for i in range(k + 1))

    def apply_op(self, k, x, op):
        """``x . op`` for a monotone op: [a] -> [k], x a stored k-simplex."""
        img = sorted(set(op))
        y, lev = x, k
        img_set = set(img)
        for j in range(k, -1, -1):
            if j not in img_set:
                y = self.face(lev, j, y)
                lev -= 1
        # epi part onto [len(img)-1]
        pos = {v: i for i, v in enumerate(img)}
        epi = [pos[v] for v in op]
        s_stack = []
        while len(epi) > lev + 1:
            for i in range(len(epi) - 1):
                if epi[i] == epi[i + 1]:
                    s_stack.append(i)
                    del epi[i + 1]
                    break
        for i in reversed(s_stack):
            y = self.degen(lev, i, y)
            lev += 1
        return y

    def is_degenerate(self, k, x):
        if k == 0:
            return False
        for i in range(k):
            if self.degen(k - 1, i, self.face(k, i, x)) == x:
                return True
        return False

    def ez(self, k, x):
        """Eilenberg-Zilber decomposition: (epi, core_level, core) with
        x = core . epi and core nondegenerate."""
        key = (k, x)
        cached = self._ez_cache.get(key)
        if cached is not None:
            return cached
        for i in range(k):
            y = self.face(k, i, x)
            if self.degen(k - 1, i, y) == x:
                epi_y, m, core = self.ez(k - 1, y)
                epi = compose_ops(epi_y, sigma_op(i, k - 1))
                res = (epi, m, core)
                self._ez_cache[key] = res
                return res
        res = (tuple(range(k + 1)), k, x)
        self._ez_cache[key] = res
        return res

    def nondeg(self, k):
        return [x for x in self.level(k) if not self.is_degenerate(k, x)]

    def face_key_index(self, k):
        """Index of level-k simplices by their full face tuple (k >= 1)."""
        idx = self._face_key_cache.get(k)
        if idx is None:
            idx = {}
            for x in self.level(k):
                idx.setdefault(self.all_faces(k, x), []).append(x)
            self._face_key_cache[k] = idx
        return idx

    def validate_identities(self):
        top = self.top
        for k in range(1, top + 1):
            for i in range(k + 1):
                tbl = self.faces.get((k, i))
                if tbl is None or set(tbl) != set(self.simplices[k]):
                    raise InvalidSimplicialData(f"face table ({k},{i}) incomplete")
                for x, y in tbl.items():
                    if not self.has(k - 1, y):
                        raise InvalidSimplicialData(f"face ({k},{i}) leaves level {k-1}")
        for k in range(0, top):
            for i in range(k + 1):
                tbl = self.degens.get((k, i))
                if tbl is None or set(tbl) != set(self.simplices[k]):
                    raise InvalidSimplicialData(f"degeneracy table ({k},{i}) incomplete")
                for x, y in tbl.items():
                    if not self.has(k + 1, y):
                        raise InvalidSimplicialData(f"degeneracy ({k},{i}) leaves level {k+1}")
        for k in range(2, top + 1):
            for x in self.simplices[k]:
                for j in range(k + 1):
                    for i in range(j):
                        if self.face(k - 1, i, self.face(k, j, x)) != \
                           self.face(k - 1, j - 1, self.face(k, i, x)):
                            raise InvalidSimplicialData(
                                f"d_{i} d_{j} != d_{j-1} d_{i} at level {k}: {x!r}")
        for k in range(0, top - 1):
            for x in self.simplices[k]:
                for j in range(k + 1):
                    for i in range(j + 1):
                        if self.degen(k + 1, i, self.degen(k, j, x)) != \
                           self.degen(k + 1, j + 1, self.degen(k, i, x)):
                            raise InvalidSimplicialData(
                                f"s_{i} s_{j} != s_{j+1} s_{i} at level {k}: {x!r}")
        for k in range(0, top):
            for x in self.simplices[k]:
                for j in range(k + 1):
                    sx = self.degen(k, j, x)
                    for i in range(k + 2):
                        v = self.face(k + 1, i, sx)
                        if i == j or i == j + 1:
                            if v != x:
                                raise InvalidSimplicialData(
                                    f"d_{i} s_{j} != id at level {k}: {x!r}")
                        elif i < j:
                            if v != self.degen(k - 1, j - 1, self.face(k, i, x)):
                                raise InvalidSimplicialData(
                                    f"d_{i} s_{j} != s_{j-1} d_{i} at level {k}: {x!r}")
                        else:
                            if v != self.degen(k - 1, j, self.face(k, i - 1, x)):
                                raise InvalidSimplicialData(
                                    f"d_{i} s_{j} != s_{j} d_{i-1} at level {k}: {x!r}")

    def structural_key(self):
        key_levels = []
        for k, lev in enumerate(self.simplices):
            key_levels.append(tuple(sorted((_name_key(x) for x in lev))))
        return tuple(key_levels)

    def __eq__(self, other):
        if not isinstance(other, SimplicialData):
            return NotImplemented
        return (self.simplices == other.simplices
                and self.faces == other.faces and self.degens == other.degens)

    def __hash__(self):
        return hash(self.structural_key())


class TauSSet(SimplicialData):
    """A tau-finite simplicial set: stored levels 0..top with top >= cosk_level.

    Levels above ``top`` exist implicitly: a k-simplex is a compatible family
    of values on the nonempty subsets of [k] of size <= cosk_level+1.  The
    extension cache behaves as a write-once memo: fills are deterministic and
    never overwritten.
    """

    def __init__(self, cosk_level, simplices, faces, degens, check=True,
                 check_cosk=True):
        if cosk_level < 0:
            raise ValueError("cosk_level must be >= 0")
        if len(simplices) - 1 < cosk_level:
            raise ValueError("stored top must be >= cosk_level")
        super().__init__(simplices, faces, degens, check=check)
        self.cosk_level = cosk_level
        self._family_indices = {}
        self._ext_cache = {}
        if check and check_cosk:
            self.validate_coskeletal()

    # -- families ---------------------------------------------------------

    def family_of(self, k, x):
        """Coskeletal family of a stored k-simplex (k can be any stored level)."""
        subs = _subsets_for_family(k, self.cosk_level)
        return tuple(self.apply_op(k, x, s) for s in subs)

    def family_index(self, k):
        idx = self._family_indices.get(k)
        if idx is None:
            idx = {self.family_of(k, x): x for x in self.level(k)}
            if len(idx) != len(self.level(k)):
                raise InvalidSimplicialData(
                    f"level {k} simplices not determined by their families")
            self._family_indices[k] = idx
        return idx

    def enumerate_families(self, k, budget=None):
        """All compatible families over tau_n(Delta^k), n = cosk_level."""
        budget = budget or DEFAULT_LEVEL_BUDGET
        n = self.cosk_level
        subs = _subsets_for_family(k, n)
        sub_pos = {s: i for i, s in enumerate(subs)}
        results = []
        assignment = [None] * len(subs)

        # candidates for subset S given assigned proper faces
        def candidates(si):
            s = subs[si]
            size = len(s)
            if size == 1:
                return self.level(0)
            key = tuple(assignment[sub_pos[s[:i] + s[i + 1:]]] for i in range(size))
            return self.face_key_index(size - 1).get(key, ())

        def rec(si):
            if len(results) > budget:
                raise BudgetExceeded(
                    f"level {k} family enumeration exceeded budget {budget}")
            if si == len(subs):
                results.append(tuple(assignment))
                return
            for c in candidates(si):
                assignment[si] = c
                rec(si + 1)
            assignment[si] = None

        rec(0)
        return results

    def validate_coskeletal(self):
        """Stored levels above cosk_level must coincide with family extension."""
        for k in range(self.cosk_level + 1, self.top + 1):
            idx = self.family_index(k)  # raises if not injective
            families = self.enumerate_families(k)
            if len(families) != len(idx):
                raise InvalidSimplicialData(
                    f"level {k}: {len(self.level(k))} stored simplices but "
                    f"{len(families)} compatible families")

    # -- materialization --------------------------------------------------

    def extended(self, new_top, budget=None):
        """This object with levels materialized up to ``new_top``."""
        if new_top <= self.top:
            return self
        cur = self
        for t in sorted(self._ext_cache):
            if t <= new_top:
                cur = self._ext_cache[t]
        while cur.top < new_top:
            cur = cur._extend_one(budget)
            self._ext_cache.setdefault(cur.top, cur)
        return cur

    def _extend_one(self, budget=None):
        k = self.top + 1
        n = self.cosk_level
        families = self.enumerate_families(k, budget)
        subs = _subsets_for_family(k, n)
        sub_pos = {s: i for i, s in enumerate(subs)}
        names = [("~", fam) for fam in families]
        fam_of_name = {("~", fam): fam for fam in families}

        simplices = [list(lev) for lev in self.simplices] + [names]
        faces = {key: dict(tbl) for key, tbl in self.faces.items()}
        degens = {key: dict(tbl) for key, tbl in self.degens.items()}

        lower_subs = _subsets_for_family(k - 1, n)
        # faces level k -> k-1; level k-1 == old top, so values are native names
        for i in range(k + 1):
            dop = delta_op(i, k)
            tbl = {}
            for nm in names:
                fam = fam_of_name[nm]
                values = {}
                for s in lower_subs:
                    img = tuple(dop[v] for v in s)
                    values[s] = fam[sub_pos[img]]
                if k - 1 <= n:
                    tbl[nm] = values[tuple(range(k))]
                else:
                    tbl[nm] = self.family_index(k - 1)[
                        tuple(values[s] for s in lower_subs)]
            faces[(k, i)] = tbl
        # degeneracies level k-1 -> k: family value at S is x . (sigma_i o S)
        for i in range(k):
            sop = sigma_op(i, k - 1)
            tbl = {}
            for x in self.level(k - 1):
                values = tuple(self.apply_op(k - 1, x, tuple(sop[v] for v in s))
                               for s in subs)
                tbl[x] = ("~", values)
            degens[(k - 1, i)] = tbl

        out = TauSSet(self.cosk_level, simplices, faces, degens,
                      check=False, check_cosk=False)
        return out

    def level_ext(self, k, budget=None):
        """Simplices at level k, materializing if needed."""
        if k <= self.top:
            return self.level(k)
        return self.extended(k, budget).level(k)

    def structural_key(self):
        return (self.cosk_level,) + super().structural_key()

    def __eq__(self, other):
        if not isinstance(other, TauSSet):
            return NotImplemented
        return (self.cosk_level == other.cosk_level
                and SimplicialData.__eq__(self, other) is True)

    def __hash__(self):
        return hash(self.structural_key())

    def level_counts(self):
        return [len(lev) for lev in self.simplices]


# -- constructors -----------------------------------------------------------

def from_tables(cosk_level, simplices, faces, degens, check=True):
    return TauSSet(cosk_level, simplices, faces, degens, check=check)


def discrete(points, top=1):
    """K(S, 0): the constant simplicial set on a finite point set."""
    points = list(points)
    simplices = [list(points) for _ in range(top + 1)]
    faces = {(k, i): {p: p for p in points}
             for k in range(1, top + 1) for i in range(k + 1)}
    degens = {(k, i): {p: p for p in points}
              for k in range(0, top) for i in range(k + 1)}
    return TauSSet(0, simplices, faces, degens, check=False, check_cosk=False)


def point(top=1):
    return discrete(["*"], top)


def standard_simplex_data(n, top):
    """Delta^n as plain truncated data: level k = monotone maps [k] -> [n]."""
    simplices = [monotone_maps(k, n) for k in range(top + 1)]
    faces = {}
    degens = {}
    for k in range(1, top + 1):
        for i in range(k + 1):
            dop = delta_op(i, k)
            faces[(k, i)] = {t: compose_ops(t, dop) for t in simplices[k]}
    for k in range(0, top):
        for i in range(k + 1):
            sop = sigma_op(i, k)
            degens[(k, i)] = {t: compose_ops(t, sop) for t in simplices[k]}
    return SimplicialData(simplices, faces, degens, check=False)


def standard_simplex(n, top=None):
    """Delta^n as a TauSSet (2-coskeletal; 0-coskeletal for n = 0)."""
    cosk = 0 if n == 0 else 2
    if top is None:
        top = max(cosk, n)
    d = standard_simplex_data(n, max(top, cosk))
    return TauSSet(cosk, d.simplices, d.faces, d.degens,
                   check=False, check_cosk=False)


def truncate(x, m):
    """Truncated data: levels 0..m of ``x`` (no coskeletal claim)."""
    if m < 0:
        raise ValueError("truncation level must be >= 0")
    xe = x.extended(m) if isinstance(x, TauSSet) and x.top < m else x
    simplices = [list(xe.level(k)) for k in range(m + 1)]
    faces = {(k, i): dict(xe.faces[(k, i)])
             for k in range(1, m + 1) for i in range(k + 1)}
    degens = {(k, i): dict(xe.degens[(k, i)])
              for k in range(0, m) for i in range(k + 1)}
    return SimplicialData(simplices, faces, degens, check=False)


def coskeleton(data, m, top=None, budget=None):
    """cosk_m of truncated data: a TauSSet with cosk_level m.

    The unit map is the identity on m-coskeletal inputs: stored levels up to
    min(data.top, m) are reused verbatim, higher ones are re-derived.
    """
    if data.top < m:
        raise ValueError(f"need levels 0..{m} to form cosk_{m}")
    t = truncate(data, m)
    out = TauSSet(m, t.simplices, t.faces, t.degens, check=False,
                  check_cosk=False)
    if top is not None and top > m:
        out = out.extended(top, budget)
    return out


def product_data(a, b, top):
    """Levelwise product of plain simplicial data (pairs of names)."""
    if a.top < top or b.top < top:
        raise ValueError("factors must store enough levels")
    simplices = [[(x, y) for x in a.level(k) for y in b.level(k)]
                 for k in range(top + 1)]
    faces = {}
    degens = {}
    for k in range(1, top + 1):
        for i in range(k + 1):
            fa, fb = a.faces[(k, i)], b.faces[(k, i)]
            faces[(k, i)] = {(x, y): (fa[x], fb[y]) for x, y in simplices[k]}
    for k in range(0, top):
        for i in range(k + 1):
            da, db = a.degens[(k, i)], b.degens[(k, i)]
            degens[(k, i)] = {(x, y): (da[x], db[y]) for x, y in simplices[k]}
    return SimplicialData(simplices, faces, degens, check=False)


def product(x, y, top=None, budget=None):
    """Product of TauSSets; cosk level of the result is the max of the inputs'."""
    cosk = max(x.cosk_level, y.cosk_level)
    if top is None:
        top = max(cosk, min(x.top, y.top))
    top = max(top, cosk)
    xe, ye = x.extended(top, budget), y.extended(top, budget)
    d = product_data(xe, ye, top)
    p = TauSSet(cosk, d.simplices, d.faces, d.degens, check=False,
                check_cosk=False)
    pr1 = SimplicialMap(p, x, {k: {(u, v): u for (u, v) in p.level(k)}
                               for k in range(top + 1)}, check=False)
    pr2 = SimplicialMap(p, y, {k: {(u, v): v for (u, v) in p.level(k)}
                               for k in range(top + 1)}, check=False)
    return p, pr1, pr2


def pullback(f, g, top=None, budget=None):
    """Strict pullback of f: X -> Z <- Y :g, with its two projections."""
    if f.target is not g.target and f.target != g.target:
        raise ValueError("pullback needs a shared target")
    x, y, z = f.source, g.source, f.target
    cosk = max(x.cosk_level, y.cosk_level, z.cosk_level)
    if top is None:
        top = max(cosk, min(x.top, y.top))
    top = max(top, cosk)
    xe, ye = x.extended(top, budget), y.extended(top, budget)
    simplices = [[(u, v) for u in xe.level(k) for v in ye.level(k)
                  if f.apply(k, u) == g.apply(k, v)] for k in range(top + 1)]
    faces = {}
    degens = {}
    for k in range(1, top + 1):
        for i in range(k + 1):
            faces[(k, i)] = {(u, v): (xe.face(k, i, u), ye.face(k, i, v))
                             for (u, v) in simplices[k]}
    for k in range(0, top):
        for i in range(k + 1):
            degens[(k, i)] = {(u, v): (xe.degen(k, i, u), ye.degen(k, i, v))
                              for (u, v) in simplices[k]}
    p = TauSSet(cosk, simplices, faces, degens, check=False, check_cosk=False)
    pr1 = SimplicialMap(p, x, {k: {s: s[0] for s in p.level(k)}
                               for k in range(top + 1)}, check=False)
    pr2 = SimplicialMap(p, y, {k: {s: s[1] for s in p.level(k)}
                               for k in range(top + 1)}, check=False)
    return p, pr1, pr2


# -- simplicial maps --------------------------------------------------------

class SimplicialMap:
    """A map of TauSSets given by level functions.

    Levels up to max(source.cosk_level, target.cosk_level) determine the map;
    values at higher levels are computed by coskeletal extension.
    """

    def __init__(self, source, target, levels, check=True):
        self.source = source
        self.target = target
        self.levels = {k: dict(v) for k, v in levels.items()}
        self.det_level = max(source.cosk_level, target.cosk_level)
        if check:
            self.validate()

    @staticmethod
    def from_function(source, target, fn, top=None, check=True):
        top = top if top is not None else \
            min(source.top, max(source.cosk_level, target.cosk_level))
        levels = {k: {x: fn(k, x) for x in source.level(k)}
                  for k in range(top + 1)}
        return SimplicialMap(source, target, levels, check=check)

    @staticmethod
    def identity(x):
        return SimplicialMap.from_function(x, x, lambda k, s: s, check=False)

    def stored_top(self):
        return max(self.levels) if self.levels else -1

    def apply(self, k, x):
        if k in self.levels and x in self.levels[k]:
            return self.levels[k][x]
        if k <= self.det_level:
            raise KeyError(f"map not defined on level {k} simplex {x!r}")
        src = self.source.extended(k)
        tgt = self.target.extended(k)
        fam = src.family_of(k, x)
        subs = _subsets_for_family(k, src.cosk_level)
        # target family indexed over target-cosk subsets
        tsubs = _subsets_for_family(k, tgt.cosk_level)
        spos = {s: i for i, s in enumerate(subs)}
        tfam = []
        for s in tsubs:
            if s in spos:
                tfam.append(self.apply(len(s) - 1, fam[spos[s]]))
            else:
                # source cosk below target cosk: compute the value directly
                tfam.append(self.apply(len(s) - 1, src.apply_op(k, x, s)))
        return tgt.family_index(k)[tuple(tfam)]

    def validate(self):
        need = self.det_level
        if self.stored_top() < need:
            raise InvalidSimplicialData(
                f"map must provide levels 0..{need}")
        for k in sorted(self.levels):
            tbl = self.levels[k]
            if set(tbl) != set(self.source.level_ext(k)):
                raise InvalidSimplicialData(f"map level {k} has wrong domain")
            tgt = self.target.extended(k) if k > self.target.top else self.target
            for x, y in tbl.items():
                if not tgt.has(k, y):
                    raise InvalidSimplicialData(
                        f"map level {k} value {y!r} not in target")
        for k in sorted(self.levels):
            if k == 0:
                continue
            if k - 1 not in self.levels:
                continue
            src = self.source.extended(k) if k > self.source.top else self.source
            tgt = self.target.extended(k) if k > self.target.top else self.target
            for x in src.level(k):
                for i in range(k + 1):
                    if self.apply(k - 1, src.face(k, i, x)) != \
                       tgt.face(k, i, self.apply(k, x)):
                        raise InvalidSimplicialData(
                            f"map does not commute with d_{i} at level {k}")
        for k in sorted(self.levels):
            if k + 1 not in self.levels:
                continue
            src = self.source
            tgt = self.target
            for x in src.level(k):
                for i in range(k + 1):
                    if self.apply(k + 1, src.degen(k, i, x)) != \
                       tgt.degen(k, i, self.apply(k, x)):
                        raise InvalidSimplicialData(
                            f"map does not commute with s_{i} at level {k}")

    def compose(self, other):
        """self o other."""
        if other.target is not self.target and other.target != self.source:
            if other.target != self.source:
                raise ValueError("composition mismatch")
        top = min(other.stored_top(),
                  max(self.det_level, other.det_level))
        levels = {}
        for k in range(top + 1):
            levels[k] = {x: self.apply(k, other.apply(k, x))
                         for x in other.source.level(k)}
        return SimplicialMap(other.source, self.target, levels, check=False)

    def equals(self, other):
        if self.source != other.source or self.target != other.target:
            return False
        det = max(self.det_level, other.det_level)
        for k in range(det + 1):
            for x in self.source.level_ext(k):
                if self.apply(k, x) != other.apply(k, x):
                    return False
        return True

    def is_levelwise_bijective(self, upto=None):
        upto = upto if upto is not None else self.det_level
        for k in range(upto + 1):
            src = self.source.level_ext(k)
            tgt = self.target.level_ext(k)
            seen = set()
            for x in src:
                seen.add(self.apply(k, x))
            if len(seen) != len(src) or len(seen) != len(tgt):
                return False
        return True


def constant_map(x, target, vertex):
    """The map collapsing x to a vertex of the target."""
    tgt = target
    cache = {}

    def tot_degen(k):
        if k not in cache:
            if k == 0:
                cache[k] = vertex
            else:
                cache[k] = tgt.degen(k - 1, 0, tot_degen(k - 1))
        return cache[k]

    return SimplicialMap.from_function(x, target, lambda k, s: tot_degen(k),
                                       check=False)


def terminal_map(x, pt=None):
    pt = pt or point()
    return constant_map(x, pt, "*")


# -- truncated map enumeration (finite constraint search) -------------------

def _nondeg_vars(a, upto):
    out = []
    for k in range(min(upto, a.top) + 1):
        for x in a.level(k):
            if not a.is_degenerate(k, x):
                out.append((k, x))
    return out


def truncated_maps(a, b, upto, prescribed=None, max_count=None, budget=None,
                   domain_filter=None):
    """All simplicial maps tau_upto(a) -> tau_upto(b), as assignments on the
    nondegenerate simplices of ``a`` in dimensions <= upto.

    ``b`` must be a TauSSet with ``upto <= b.top``; when ``upto`` equals
    max(cosk levels) these assignments are exactly the maps a -> b.
    Candidate domains are pruned by arc consistency before branching, so
    highly constrained targets (nerves, Eilenberg-MacLane spaces) stay cheap.
    ``domain_filter(var, cand)`` optionally restricts candidate images.
    """
    budget = budget or DEFAULT_LEVEL_BUDGET
    prescribed = prescribed or {}
    upto = min(upto, a.top)
    variables = _nondeg_vars(a, upto)
    var_pos = {v: i for i, v in enumerate(variables)}

    # face structure: for var (k,x) and each i, the EZ core of d_i x
    face_info = {}
    for (k, x) in variables:
        if k == 0:
            face_info[(k, x)] = []
            continue
        info = []
        for i in range(k + 1):
            f = a.face(k, i, x)
            epi, m, core = a.ez(k - 1, f)
            info.append((i, (m, core), epi if epi != tuple(range(k)) else None))
        face_info[(k, x)] = info

    domains = {}
    for (k, x) in variables:
        if (k, x) in prescribed:
            val = prescribed[(k, x)]
            if not b.has(k, val):
                return []
            domains[(k, x)] = [val]
        else:
            lvl = b.level(k)
            if len(lvl) > budget:
                raise BudgetExceeded(f"target level {k} too large")
            if domain_filter is not None:
                domains[(k, x)] = [c for c in lvl if domain_filter((k, x), c)]
            else:
                domains[(k, x)] = list(lvl)

    dependents = {v: [] for v in variables}
    for v in variables:
        for (i, core, epi) in face_info[v]:
            dependents[core].append(v)

    def op_values(core_dom, epi, m):
        if epi is None:
            return set(core_dom)
        return {b.apply_op(m, c, epi) for c in core_dom}

    def propagate(doms):
        queue = list(variables)
        queued = set(queue)
        while queue:
            v = queue.pop()
            queued.discard(v)
            k, x = v
            dv = doms[v]
            changed_cores = []
            if k:
                allowed = []
                for (i, core, epi) in face_info[v]:
                    allowed.append((i, op_values(doms[core], epi, core[0])))
                newdv = [cand for cand in dv
                         if all(b.face(k, i, cand) in vals for i, vals in allowed)]
                if not newdv:
                    return None
                if len(newdv) != len(dv):
                    doms[v] = newdv
                    dv = newdv
                # reverse pruning of core domains
                for (i, core, epi) in face_info[v]:
                    reachable = {b.face(k, i, cand) for cand in dv}
                    cd = doms[core]
                    if epi is None:
                        newcd = [c for c in cd if c in reachable]
                    else:
                        newcd = [c for c in cd
                                 if b.apply_op(core[0], c, epi) in reachable]
                    if not newcd:
                        return None
                    if len(newcd) != len(cd):
                        doms[core] = newcd
                        changed_cores.append(core)
            for c in changed_cores:
                for dep in dependents[c]:
                    if dep not in queued:
                        queue.append(dep)
                        queued.add(dep)
                if c not in queued:
                    queue.append(c)
                    queued.add(c)
        return doms

    results = []
    nodes = [0]

    def search(doms):
        if max_count is not None and len(results) >= max_count:
            return
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded("map search exceeded budget")
        doms = propagate(doms)
        if doms is None:
            return
        pick = None
        for v in variables:
            if len(doms[v]) > 1:
                if pick is None or len(doms[v]) < len(doms[pick]):
                    pick = v
        if pick is None:
            results.append({v: doms[v][0] for v in variables})
            return
        for cand in doms[pick]:
            nd = {v: list(d) for v, d in doms.items()}
            nd[pick] = [cand]
            search(nd)
            if max_count is not None and len(results) >= max_count:
                return

    search(domains)
    return results


def assignment_to_map(a, b, assignment, upto):
    """Extend an assignment on nondegenerates to full level functions."""
    levels = {}
    for k in range(min(upto, a.top) + 1):
        tbl = {}
        for x in a.level(k):
            epi, m, core = a.ez(k, x)
            val = assignment[(m, core)]
            tbl[x] = b.apply_op(m, val, epi) if epi != tuple(range(k + 1)) else val
        levels[k] = tbl
    return levels


def enumerate_maps(x, y, budget=None, max_count=None):
    """All simplicial maps x -> y between TauSSets."""
    upto = max(x.cosk_level, y.cosk_level)
    xe = x.extended(upto, budget)
    ye = y.extended(upto, budget)
    assignments = truncated_maps(xe, ye, upto, max_count=max_count,
                                 budget=budget)
    return [SimplicialMap(x, y, assignment_to_map(xe, ye, asg, upto),
                          check=False) for asg in assignments]


def find_isomorphism(x, y, budget=None):
    """An isomorphism x -> y of TauSSets, or None."""
    upto = max(x.cosk_level, y.cosk_level)
    xe, ye = x.extended(upto, budget), y.extended(upto, budget)
    for k in range(upto + 1):
        if len(xe.level(k)) != len(ye.level(k)):
            return None
    assignments = truncated_maps(xe, ye, upto, budget=budget)
    for asg in assignments:
        f = SimplicialMap(x, y, assignment_to_map(xe, ye, asg, upto),
                          check=False)
        if f.is_levelwise_bijective(upto):
            return f
    return None


# -- horns, Kan property, fibrations ----------------------------------------

def horn_families(x, m, i, budget=None):
    """All maps Lambda^m_i -> x: dicts j -> face for j != i, compatible."""
    budget = budget or DEFAULT_LEVEL_BUDGET
    xe = x.extended(m - 1, budget) if x.top < m - 1 else x
    positions = [j for j in range(m + 1) if j != i]
    level = xe.level(m - 1)
    results = []
    assignment = {}

    def rec(pi):
        if len(results) > budget:
            raise BudgetExceeded("horn enumeration exceeded budget")
        if pi == len(positions):
            results.append(dict(assignment))
            return
        j = positions[pi]
        for cand in level:
            ok = True
            for jp in positions[:pi]:
                # d_jp cand must equal d_{j-1} assignment[jp]  (jp < j)
                if m >= 2:
                    if xe.face(m - 1, jp, cand) != \
                       xe.face(m - 1, j - 1, assignment[jp]):
                        ok = False
                        break
            if ok:
                assignment[j] = cand
                rec(pi + 1)
        assignment.pop(j, None)

    rec(0)
    return results


def fill_horn(x, m, i, family, budget=None):
    """A filler for the horn family {j: face, j != i}, or None."""
    xe = x.extended(m, budget)
    for cand in xe.level(m):
        if all(xe.face(m, j, cand) == f for j, f in family.items()):
            return cand
    return None


@dataclass
class Verdict:
    ok: bool
    reason: str = ""
    witness: object = None
    checked: int = 0

    def __bool__(self):
        return self.ok


def is_kan(x, budget=None, max_dim=None):
    """Horn filling in dimensions 1..cosk_level+1 (higher horns fill uniquely
    for coskeletal complexes; see spot_check_higher_horn)."""
    bound = max_dim if max_dim is not None else x.cosk_level + 1
    checked = 0
    for m in range(1, bound + 1):
        for i in range(m + 1):
            for family in horn_families(x, m, i, budget):
                checked += 1
                if fill_horn(x, m, i, family, budget) is None:
                    return Verdict(False, f"unfillable horn Lambda^{m}_{i}",
                                   (m, i, family), checked)
    return Verdict(True, "all horns filled", None, checked)


def spot_check_higher_horn(x, budget=None):
    """Check that horns in dimension cosk_level+2 fill uniquely."""
    m = x.cosk_level + 2
    xe = x.extended(m, budget)
    for i in range(m + 1):
        for family in horn_families(xe, m, i, budget):
            fillers = [c for c in xe.level(m)
                       if all(xe.face(m, j, c) == f for j, f in family.items())]
            if len(fillers) != 1:
                return Verdict(False, f"horn Lambda^{m}_{i} has {len(fillers)} fillers",
                               (m, i, family))
    return Verdict(True, f"all dimension-{m} horns fill uniquely")


def has_rlp_against_horns(p, max_dim=None, budget=None):
    """Right lifting property of p: E -> B against all horn inclusions in
    dimensions <= max(cosk)+1 (the Kan-fibration test)."""
    e, b = p.source, p.target
    bound = max_dim if max_dim is not None else \
        max(e.cosk_level, b.cosk_level) + 1
    checked = 0
    for m in range(1, bound + 1):
        ee = e.extended(m, budget)
        be = b.extended(m, budget)
        for i in range(m + 1):
            for family in horn_families(ee, m, i, budget):
                image = {j: p.apply(m - 1, f) for j, f in family.items()}
                for cand_b in be.level(m):
                    if not all(be.face(m, j, cand_b) == f for j, f in image.items()):
                        continue
                    checked += 1
                    lift = None
                    for cand_e in ee.level(m):
                        if p.apply(m, cand_e) != cand_b:
                            continue
                        if all(ee.face(m, j, cand_e) == f for j, f in family.items()):
                            lift = cand_e
                            break
                    if lift is None:
                        return Verdict(False,
                                       f"no lift against Lambda^{m}_{i}",
                                       (m, i, family, cand_b), checked)
    return Verdict(True, "all horn lifting problems solved", None, checked)


def is_trivial_fibration(p, max_dim=None, budget=None):
    """RLP against boundary inclusions dDelta^m in Delta^m for m <= bound."""
    e, b = p.source, p.target
    bound = max_dim if max_dim is not None else \
        max(e.cosk_level, b.cosk_level) + 1
    checked = 0
    # m = 0: surjectivity on vertices
    image0 = {p.apply(0, v) for v in e.level(0)}
    for v in b.level(0):
        checked += 1
        if v not in image0:
            return Verdict(False, "not surjective on vertices", v, checked)
    for m in range(1, bound + 1):
        ee = e.extended(m, budget)
        be = b.extended(m, budget)
        for family in _boundary_families(ee, m, budget):
            image = {j: p.apply(m - 1, f) for j, f in family.items()}
            for cand_b in be.level(m):
                if not all(be.face(m, j, cand_b) == f for j, f in image.items()):
                    continue
                checked += 1
                lift = None
                for cand_e in ee.level(m):
                    if p.apply(m, cand_e) != cand_b:
                        continue
                    if all(ee.face(m, j, cand_e) == f for j, f in family.items()):
                        lift = cand_e
                        break
                if lift is None:
                    return Verdict(False,
                                   f"no lift against dDelta^{m}",
                                   (m, family, cand_b), checked)
    return Verdict(True, "all boundary lifting problems solved", None, checked)


def _boundary_families(x, m, budget=None):
    """All maps dDelta^m -> x: dicts j -> face for all j, compatible."""
    budget = budget or DEFAULT_LEVEL_BUDGET
    xe = x.extended(m - 1, budget) if x.top < m - 1 else x
    level = xe.level(m - 1)
    results = []
    assignment = {}

    def rec(j):
        if len(results) > budget:
            raise BudgetExceeded("boundary enumeration exceeded budget")
        if j == m + 1:
            results.append(dict(assignment))
            return
        for cand in level:
            ok = True
            for jp in range(j):
                if m >= 2 and xe.face(m - 1, jp, cand) != \
                   xe.face(m - 1, j - 1, assignment[jp]):
                    ok = False
                    break
            if ok:
                assignment[j] = cand
                rec(j + 1)
        assignment.pop(j, None)

    rec(0)
    return results


# -- homotopies and minimality -----------------------------------------------

def rel_boundary_homotopic(x, m, s, t, budget=None):
    """Is there a homotopy Delta^m x Delta^1 -> x from s to t which is
    degenerate on the boundary?  Requires s, t with equal faces."""
    if s == t:
        return True
    if m >= 1:
        if x.all_faces(m, s) != x.all_faces(m, t):
            raise ValueError("rel-boundary homotopy needs equal boundaries")
    u = x.cosk_level
    prism_top = max(m + 1, 1)
    a = product_data(standard_simplex_data(m, prism_top),
                     standard_simplex_data(1, prism_top), prism_top)
    upto = min(u, m + 1)
    xe = x.extended(max(x.top, upto), budget)
    prescribed = {}
    for k in range(min(upto, a.top) + 1):
        for (pa, pb) in a.level(k):
            if a.is_degenerate(k, (pa, pb)):
                continue
            if len(set(pa)) < m + 1:
                prescribed[(k, (pa, pb))] = xe.apply_op(m, s, pa)
            elif all(v == 0 for v in pb):
                prescribed[(k, (pa, pb))] = xe.apply_op(m, s, pa)
            elif all(v == 1 for v in pb):
                prescribed[(k, (pa, pb))] = xe.apply_op(m, t, pa)
    found = truncated_maps(a, xe, upto, prescribed, max_count=1, budget=budget)
    return bool(found)


def is_minimal(x, budget=None):
    """Minimality check: rel-boundary homotopic simplices with equal boundary
    must be equal.  Dimensions above cosk_level are boundary-determined, so
    only dimensions <= cosk_level need inspection."""
    kan = is_kan(x, budget)
    if not kan.ok:
        return Verdict(False, "not a Kan complex: " + kan.reason, kan.witness)
    for m in range(0, x.cosk_level + 1):
        groups = {}
        for s in x.level(m):
            key = x.all_faces(m, s) if m >= 1 else ()
            groups.setdefault(key, []).append(s)
        for key, members in groups.items():
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    if rel_boundary_homotopic(x, m, members[i], members[j],
                                              budget):
                        return Verdict(
                            False,
                            f"distinct homotopic level-{m} simplices with "
                            f"equal boundary",
                            (m, members[i], members[j]))
    return Verdict(True, "minimal")


@dataclass
class MinimalizeResult:
    minimal: "TauSSet"
    inclusion: "SimplicialMap"
    class_map: dict  # (level, simplex) -> chosen representative


def minimalize(x, budget=None):
    """A minimal subcomplex, picking one representative per rel-boundary
    homotopy class compatibly with lower choices.

    The class_map records, for every simplex whose boundary lies in the
    chosen subcomplex, the representative of its homotopy class; it is
    diagnostic data, not a simplicial retraction.
    """
    kan = is_kan(x, budget)
    if not kan.ok:
        raise ValueError("minimalize requires a Kan complex: " + kan.reason)
    chosen = []
    class_map = {}
    for m in range(x.top + 1):
        # candidates: all faces already chosen
        if m == 0:
            cands = list(x.level(0))
            groups = {(): cands}
        else:
            prev = set(chosen[m - 1])
            cands = [s for s in x.level(m)
                     if all(f in prev for f in x.all_faces(m, s))]
            groups = {}
            for s in cands:
                groups.setdefault(x.all_faces(m, s), []).append(s)
        level_chosen = []
        for key, members in sorted(groups.items(),
                                   key=lambda kv: _name_key(kv[0])):
            classes = []
            if m > x.cosk_level:
                classes = [[s] for s in members]  # boundary-determined
            else:
                for s in members:
                    placed = False
                    for cls in classes:
                        if rel_boundary_homotopic(x, m, cls[0], s, budget):
                            cls.append(s)
                            placed = True
                            break
                    if not placed:
                        classes.append([s])
            for cls in classes:
                degen_members = [s for s in cls if x.is_degenerate(m, s)] \
                    if m >= 1 else []
                if degen_members:
                    if len(set(degen_members)) > 1:
                        raise InvalidSimplicialData(
                            "homotopic degenerate simplices with equal "
                            "boundary must coincide")
                    rep = degen_members[0]
                else:
                    rep = cls[0]
                level_chosen.append(rep)
                for s in cls:
                    class_map[(m, s)] = rep
        chosen.append(level_chosen)

    keep = [set(lev) for lev in chosen]
    simplices = [[s for s in x.level(m) if s in keep[m]]
                 for m in range(x.top + 1)]
    faces = {}
    degens = {}
    for m in range(1, x.top + 1):
        for i in range(m + 1):
            faces[(m, i)] = {s: x.face(m, i, s) for s in simplices[m]}
    for m in range(0, x.top):
        for i in range(m + 1):
            degens[(m, i)] = {s: x.degen(m, i, s) for s in simplices[m]}
    minimal = TauSSet(x.cosk_level, simplices, faces, degens, check=True,
                      check_cosk=True)
    incl = SimplicialMap.from_function(minimal, x, lambda k, s: s, check=False)
    return MinimalizeResult(minimal, incl, class_map)


# -- homotopy groups ----------------------------------------------------------

def _basepoint_simplex(x, basepoint, k):
    s = basepoint
    for j in range(k):
        s = x.degen(j, 0, s)
    return s


def homotopy_group(x, basepoint, k, budget=None, assume_minimal=False):
    """Homotopy of a minimal Kan complex: pi_0 as a vertex list, pi_1 as a
    FinGroup, pi_k (k >= 2) as a FinAbGroup.

    Elements are k-simplices with totally degenerate boundary at the
    basepoint; multiplication fills the horn with faces
    (*, ..., *, a, -, b) at positions (0..k-2, k-1, k+1)."""
    if basepoint not in x.level(0):
        raise ValueError("basepoint must be a vertex")
    if k == 0:
        return list(x.level(0))
    if not assume_minimal:
        mv = is_minimal(x, budget)
        if not mv.ok:
            raise ValueError("homotopy_group requires a minimal complex: "
                             + mv.reason)
    xe = x.extended(max(x.top, k + 1), budget)
    bnd = _basepoint_simplex(xe, basepoint, k - 1)
    base_k = xe.degen(k - 1, 0, bnd)
    elements = [s for s in xe.level(k)
                if all(f == bnd for f in xe.all_faces(k, s))]

    def mul(a, b):
        family = {}
        for j in range(k - 1):
            family[j] = base_k
        family[k - 1] = a
        family[k + 1] = b
        w = fill_horn(xe, k + 1, k, family, budget)
        if w is None:
            raise InvalidSimplicialData(
                "horn in homotopy-group multiplication is unfillable")
        return xe.face(k + 1, k, w)

    table = {(a, b): mul(a, b) for a in elements for b in elements}
    from .groups import FinGroup
    g = FinGroup(elements, table, check=True)
    if g.identity != base_k:
        raise InvalidSimplicialData("basepoint simplex is not the identity")
    if k == 1:
        return g
    if not g.is_abelian():
        raise InvalidSimplicialData(f"pi_{k} computed non-abelian")
    return g.abelian_invariants()


def path_components(x):
    """pi_0 as a partition of the vertex set (edge reachability)."""
    verts = list(x.level(0))
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    if x.top >= 1:
        for e in x.level(1):
            union(x.face(1, 0, e), x.face(1, 1, e))
    comps = {}
    for v in verts:
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


# -- homology and cohomology --------------------------------------------------

class ChainData:
    """Normalized chains: free Z-modules on nondegenerate simplices."""

    def __init__(self, x, top_degree, budget=None):
        xe = x.extended(top_degree, budget)
        self.space = xe
        self.top_degree = top_degree
        self.basis = [xe.nondeg(k) for k in range(top_degree + 1)]
        self.index = [{s: i for i, s in enumerate(lev)} for lev in self.basis]
        self.boundaries = {}
        for k in range(1, top_degree + 1):
            rows = len(self.basis[k - 1])
            mat = [[0] * len(self.basis[k]) for _ in range(rows)]
            for j, s in enumerate(self.basis[k]):
                for i in range(k + 1):
                    f = xe.face(k, i, s)
                    fi = self.index[k - 1].get(f)
                    if fi is not None:
                        mat[fi][j] += (-1) ** i
            self.boundaries[k] = mat

    def rank(self, k):
        return len(self.basis[k]) if 0 <= k <= self.top_degree else 0

    def boundary(self, k):
        if k in self.boundaries:
            return self.boundaries[k]
        return []

    def chain_map_matrix(self, f, k, target_chain):
        """Matrix of the induced normalized chain map in degree k."""
        rows = target_chain.rank(k)
        cols = self.rank(k)
        mat = [[0] * cols for _ in range(rows)]
        for j, s in enumerate(self.basis[k]):
            img = f.apply(k, s)
            ti = target_chain.index[k].get(img)
            if ti is not None:
                mat[ti][j] += 1
        return mat


def homology(x, degree_bound, coefficients=None, budget=None):
    """H_k for k <= degree_bound; integral if coefficients is None, else Z/m."""
    chain = ChainData(x, degree_bound + 1, budget)
    return [_homology_quotient(chain, k, coefficients).group
            for k in range(degree_bound + 1)]


def homology_quotients(x, degree_bound, coefficients=None, budget=None):
    chain = ChainData(x, degree_bound + 1, budget)
    return chain, [_homology_quotient(chain, k, coefficients)
                   for k in range(degree_bound + 1)]


def _homology_quotient(chain, k, coefficients):
    incoming = chain.boundary(k + 1)
    outgoing = chain.boundary(k) if k >= 1 else []
    n = chain.rank(k)
    if coefficients is None:
        return integral_quotient(incoming, outgoing, n)
    return mod_m_quotient(incoming, outgoing, n, coefficients)


def induced_homology_hom(f, k, src, tgt, coefficients=None):
    """The induced map H_k(source) -> H_k(target) as an AbHom.

    ``src``/``tgt`` are (ChainData, quotient list) pairs from
    homology_quotients."""
    src_chain, src_q = src
    tgt_chain, tgt_q = tgt
    mat = src_chain.chain_map_matrix(f, k, tgt_chain)
    cols = []
    for gen in src_q[k].canonical_generators():
        img = [sum(mat[i][j] * gen[j] for j in range(len(gen)))
               for i in range(tgt_chain.rank(k))]
        cols.append(list(tgt_q[k].canonical_class(img)))
    return AbHom.make(src_q[k].group, tgt_q[k].group, cols)


def cohomology(x, degree_bound, modulus, budget=None):
    """H^k(x; Z/modulus) for k <= degree_bound, via the dualized chain complex."""
    chain = ChainData(x, degree_bound + 1, budget)
    return [_cohomology_quotient(chain, k, modulus).group
            for k in range(degree_bound + 1)]


def cohomology_quotients(x, degree_bound, modulus, budget=None):
    chain = ChainData(x, degree_bound + 1, budget)
    return chain, [_cohomology_quotient(chain, k, modulus)
                   for k in range(degree_bound + 1)]


def _cohomology_quotient(chain, k, modulus):
    from .intmat import transpose
    incoming = transpose(chain.boundary(k)) if k >= 1 else []
    outgoing = transpose(chain.boundary(k + 1))
    return mod_m_quotient(incoming, outgoing, chain.rank(k), modulus)


def induced_cohomology_hom(f, k, src, tgt, modulus):
    """H^k(target) -> H^k(source) induced by f: source -> target."""
    src_chain, src_q = src
    tgt_chain, tgt_q = tgt
    mat = src_chain.chain_map_matrix(f, k, tgt_chain)
    # cochain map is the transpose: C^k(target) -> C^k(source)
    cols = []
    for gen in tgt_q[k].canonical_generators():
        img = [sum(mat[i][j] * gen[i] for i in range(tgt_chain.rank(k)))
               for j in range(src_chain.rank(k))]
        cols.append(list(src_q[k].canonical_class(img)))
    return AbHom.make(tgt_q[k].group, src_q[k].group, cols)


def cohomology_via_uct(x, degree_bound, modulus, budget=None):
    """Universal-coefficient cross-check:
    H^k = Hom(H_k, Z/m) + Ext(H_{k-1}, Z/m)."""
    hs = homology(x, degree_bound, None, budget)

    def hom_part(g):
        out = [_gcd(f, modulus) for f in g.invariant_factors]
        out += [modulus] * g.rank
        return out

    def ext_part(g):
        return [_gcd(f, modulus) for f in g.invariant_factors]

    result = []
    for k in range(degree_bound + 1):
        factors = hom_part(hs[k])
        if k >= 1:
            factors += ext_part(hs[k - 1])
        result.append(FinAbGroup.from_cyclic_factors(factors))
    return result


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# -- mapping spaces -----------------------------------------------------------

class MappingSpace:
    """Levelwise mapping space: level m is the set of maps X x Delta^m -> Y.

    The result is L-truncated data with no coskeletal level claimed.  Needs
    Y Kan for the levelwise construction to model the derived mapping space;
    the constructor does not re-check this.
    """

    def __init__(self, x, y, level_bound, budget=None):
        self.x = x
        self.y = y
        self.level_bound = level_bound
        u = y.cosk_level
        self.det = u
        xe = x.extended(max(u, x.top), budget) if x.top < u else x
        ye = y.extended(max(u, y.top), budget) if y.top < u else y
        self._xe, self._ye = xe, ye
        self._products = {}
        self._vars = {}
        self._elements = {}   # m -> list of canonical names
        self._assignments = {}  # (m, name) -> assignment dict
        for m in range(level_bound + 1):
            prod = product_data(xe, standard_simplex_data(m, u), u)
            self._products[m] = prod
            pvars = _nondeg_vars(prod, u)
            self._vars[m] = pvars
            asgs = truncated_maps(prod, ye, u, budget=budget)
            names = []
            for asg in asgs:
                nm = tuple(asg[v] for v in pvars)
                names.append(nm)
                self._assignments[(m, nm)] = asg
            order = {nm: i for i, nm in enumerate(names)}
            names.sort(key=lambda nm: order[nm])
            self._elements[m] = names
        self.data = self._build_data()

    def _evaluate(self, m, name, k, simplex):
        """Value of element ``name`` (a map X x Delta^m -> Y) on a simplex."""
        prod = self._products[m]
        asg = self._assignments[(m, name)]
        epi, mm, core = prod.ez(k, simplex)
        val = asg[(mm, core)]
        if epi == tuple(range(k + 1)):
            return val
        return self._ye.apply_op(mm, val, epi)

    def _transport(self, m_from, name, m_to, op):
        """Precompose with id_X x (op: [m_to] -> [m_from])."""
        vals = {}
        for (k, (xs, a)) in self._vars[m_to]:
            vals[(k, (xs, a))] = self._evaluate(
                m_from, name, k, (xs, compose_ops(op, a)))
        nm = tuple(vals[v] for v in self._vars[m_to])
        if (m_to, nm) not in self._assignments:
            raise InvalidSimplicialData("mapping space face left the level set")
        return nm

    def _build_data(self):
        simplices = [list(self._elements[m]) for m in range(self.level_bound + 1)]
        faces = {}
        degens = {}
        for m in range(1, self.level_bound + 1):
            for i in range(m + 1):
                dop = delta_op(i, m)
                faces[(m, i)] = {nm: self._transport(m, nm, m - 1, dop)
                                 for nm in self._elements[m]}
        for m in range(0, self.level_bound):
            for i in range(m + 1):
                sop = sigma_op(i, m)
                degens[(m, i)] = {nm: self._transport(m, nm, m + 1, sop)
                                  for nm in self._elements[m]}
        return SimplicialData(simplices, faces, degens, check=False)

    def vertex_map(self, name):
        """The SimplicialMap X -> Y corresponding to a level-0 element."""
        asg = self._assignments[(0, name)]
        xe = self._xe
        levels = {}
        for k in range(min(self.det, xe.top) + 1):
            tbl = {}
            for s in xe.level(k):
                epi, mm, core = xe.ez(k, s)
                val = asg[(mm, (core, tuple([0] * (mm + 1))))]
                tbl[s] = self._ye.apply_op(mm, val, epi) \
                    if epi != tuple(range(k + 1)) else val
            levels[k] = tbl
        return SimplicialMap(self.x, self.y, levels, check=False)

    def pi0(self):
        return pi0_of_data(self.data)


def mapping_space(x, y, level_bound, budget=None):
    return MappingSpace(x, y, level_bound, budget)


def pi0_of_data(data):
    """Components of the vertex set under the edge relation."""
    verts = list(data.level(0))
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    if data.top >= 1:
        for e in data.level(1):
            a, b = data.face(1, 0, e), data.face(1, 1, e)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    comps = {}
    for v in verts:
        comps.setdefault(find(v), []).append(v)
    return list(comps.values())


def fiberwise_rel_boundary_homotopic(p, m, s, t, budget=None):
    """Rel-boundary homotopy between s, t in the source of p whose composite
    with p is the constant homotopy (the minimal-fibration condition).

    When the source is u-coskeletal with u < m+1 the homotopy is determined
    below the prism's top dimensions, so the fiber condition is re-verified
    on the coskeletal extension of every candidate."""
    x, base = p.source, p.target
    if s == t:
        return True
    u = x.cosk_level
    prism_top = max(m + 1, 1)
    a = product_data(standard_simplex_data(m, prism_top),
                     standard_simplex_data(1, prism_top), prism_top)
    upto = min(u, m + 1)
    xe = x.extended(max(x.top, m + 1), budget)
    img = p.apply(m, s)
    prescribed = {}
    for k in range(min(upto, a.top) + 1):
        for (pa, pb) in a.level(k):
            if a.is_degenerate(k, (pa, pb)):
                continue
            if len(set(pa)) < m + 1:
                prescribed[(k, (pa, pb))] = xe.apply_op(m, s, pa)
            elif all(v == 0 for v in pb):
                prescribed[(k, (pa, pb))] = xe.apply_op(m, s, pa)
            elif all(v == 1 for v in pb):
                prescribed[(k, (pa, pb))] = xe.apply_op(m, t, pa)

    basee = base.extended(m + 1, budget)

    def fiber_filter(var, cand):
        k, (pa, pb) = var
        return p.apply(k, cand) == basee.apply_op(m, img, pa)

    candidates = truncated_maps(a, xe, upto, prescribed, budget=budget,
                                domain_filter=fiber_filter)
    for asg in candidates:
        if _extension_stays_in_fiber(p, a, xe, basee, asg, upto, m, img, s, t):
            return True
    return False


def _extension_stays_in_fiber(p, a, xe, basee, asg, upto, m, img, s, t):
    """Extend a prism assignment coskeletally and re-check the constraints."""
    values = {}
    for k in range(a.top + 1):
        for sim in a.level(k):
            if k <= upto:
                epi, mm, core = a.ez(k, sim)
                v = asg[(mm, core)]
                values[(k, sim)] = xe.apply_op(mm, v, epi) \
                    if epi != tuple(range(k + 1)) else v
            else:
                n = xe.cosk_level
                fam = tuple(values[(len(sub) - 1,
                                    a.apply_op(k, sim, sub))]
                            for sub in _subsets_for_family(k, n))
                values[(k, sim)] = xe.family_index(k)[fam]
    for k in range(a.top + 1):
        for (pa, pb) in a.level(k):
            v = values[(k, (pa, pb))]
            if p.apply(k, v) != basee.apply_op(m, img, pa):
                return False
            if len(set(pa)) < m + 1 or all(c == 0 for c in pb):
                if v != xe.apply_op(m, s, pa):
                    return False
            elif all(c == 1 for c in pb):
                if v != xe.apply_op(m, t, pa):
                    return False
    return True


def is_minimal_fibration(p, budget=None):
    """Minimal Kan fibration check: p has RLP against horns, and fiberwise
    rel-boundary homotopic simplices with equal boundary and equal image
    coincide."""
    fib = has_rlp_against_horns(p, budget=budget)
    if not fib.ok:
        return Verdict(False, "not a Kan fibration: " + fib.reason, fib.witness)
    x = p.source
    bound = max(x.cosk_level, p.target.cosk_level)
    for m in range(0, bound + 1):
        groups = {}
        for s in x.level(m):
            key = (x.all_faces(m, s) if m >= 1 else (), p.apply(m, s))
            groups.setdefault(key, []).append(s)
        for key, members in groups.items():
            for i in range(len(members)):
                for j in range(i + 1, len(members)):
                    if fiberwise_rel_boundary_homotopic(
                            p, m, members[i], members[j], budget):
                        return Verdict(
                            False,
                            f"fiberwise homotopic level-{m} simplices with "
                            f"equal boundary and image",
                            (m, members[i], members[j]))
    return Verdict(True, "minimal Kan fibration")
