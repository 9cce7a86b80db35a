"""Building blocks of finite homotopy theory: classifying spaces, Dold-Kan,
Eilenberg-MacLane spaces, W-bar constructions, homotopy quotients, and
nilpotent-closure certificates.

All constructions produce TauSSets with explicit level formulas; simplicial
identities and (where enabled) coskeletal invariants are validated
exhaustively on the stored levels.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import sset as ss
from .groups import FinGroup, cyclic_group
from .intmat import FinAbGroup
from .abelian import AbHom


# -- classifying spaces --------------------------------------------------------

def b_group(g, level_bound=3, check=True):
    """BG with (BG)_n = G^n; the nerve of the one-object groupoid on G."""
    levels = [[()]]
    for n in range(1, level_bound + 1):
        levels.append([t for t in itertools.product(g.elements, repeat=n)])
    faces = {}
    degens = {}
    for n in range(1, level_bound + 1):
        for i in range(n + 1):
            tbl = {}
            for t in levels[n]:
                if i == 0:
                    tbl[t] = t[1:]
                elif i == n:
                    tbl[t] = t[:-1]
                else:
                    tbl[t] = t[:i - 1] + (g.mul(t[i - 1], t[i]),) + t[i + 1:]
            faces[(n, i)] = tbl
    for n in range(0, level_bound):
        for i in range(n + 1):
            degens[(n, i)] = {t: t[:i] + (g.identity,) + t[i:]
                              for t in levels[n]}
    return ss.TauSSet(2, levels, faces, degens, check=check,
                      check_cosk=check and g.order ** 3 <= 3000)


def e_group(g, level_bound=3, check=True):
    """EG = cosk_0(G): levels G^{n+1}, weakly contractible, free G-action."""
    levels = [[t for t in itertools.product(g.elements, repeat=n + 1)]
              for n in range(level_bound + 1)]
    faces = {}
    degens = {}
    for n in range(1, level_bound + 1):
        for i in range(n + 1):
            faces[(n, i)] = {t: t[:i] + t[i + 1:] for t in levels[n]}
    for n in range(0, level_bound):
        for i in range(n + 1):
            degens[(n, i)] = {t: t[:i + 1] + t[i:] for t in levels[n]}
    return ss.TauSSet(0, levels, faces, degens, check=check, check_cosk=False)


def bg_quotient_map(eg, bg, g):
    """The G-covering EG -> BG, (g_0..g_n) -> (g_0 g_1^-1, ..., g_{n-1} g_n^-1)."""
    def fn(k, t):
        return tuple(g.mul(t[i], g.inv(t[i + 1])) for i in range(k))
    return ss.SimplicialMap.from_function(eg, bg, fn,
                                          top=min(eg.top, bg.top), check=True)


def classifying_space(g, level_bound=3, check=True):
    """(EG, BG, quotient map, right G-action on EG), levelwise certified."""
    eg = e_group(g, level_bound, check)
    bg = b_group(g, level_bound, check)
    q = bg_quotient_map(eg, bg, g)
    action = GAction(g, eg, lambda a, k, t: tuple(g.mul(x, a) for x in t),
                     check=check)
    if check:
        _certify_covering(q, action)
    return eg, bg, q, action


def _certify_covering(q, action):
    """Free action levelwise + the map identifies orbits with the base."""
    eg, bg, g = q.source, q.target, action.group
    for k in range(eg.top + 1):
        if not action.is_free(k):
            raise ValueError(f"action not free at level {k}")
        orbits = {}
        for t in eg.level(k):
            orbits.setdefault(action.orbit_key(k, t), set()).add(q.apply(k, t))
        values = [frozenset(v) for v in orbits.values()]
        if any(len(v) != 1 for v in values):
            raise ValueError(f"map not constant on orbits at level {k}")
        if len(values) != len(bg.level(k)):
            raise ValueError(f"orbit count mismatch at level {k}")


class GAction:
    """A right G-action on a TauSSet, acting levelwise and simplicially."""

    def __init__(self, group, space, act, check=True):
        self.group = group
        self.space = space
        self.table = {}
        for k in range(space.top + 1):
            for x in space.level(k):
                for a in group.elements:
                    self.table[(a, k, x)] = act(a, k, x)
        if check:
            self.validate()

    def act(self, a, k, x):
        return self.table[(a, k, x)]

    def validate(self):
        g, x = self.group, self.space
        for k in range(x.top + 1):
            for s in x.level(k):
                if self.act(g.identity, k, s) != s:
                    raise ValueError("identity does not act trivially")
                for a in g.elements:
                    if self.act(a, k, s) not in x._index[k]:
                        raise ValueError("action leaves the level set")
                    for b in g.elements:
                        if self.act(b, k, self.act(a, k, s)) != \
                           self.act(g.mul(a, b), k, s):
                            raise ValueError("action is not associative")
        for k in range(1, x.top + 1):
            for s in x.level(k):
                for a in g.elements:
                    for i in range(k + 1):
                        if x.face(k, i, self.act(a, k, s)) != \
                           self.act(a, k - 1, x.face(k, i, s)):
                            raise ValueError("action does not commute with faces")
        for k in range(0, x.top):
            for s in x.level(k):
                for a in g.elements:
                    for i in range(k + 1):
                        if x.degen(k, i, self.act(a, k, s)) != \
                           self.act(a, k + 1, x.degen(k, i, s)):
                            raise ValueError(
                                "action does not commute with degeneracies")

    def is_free(self, k):
        e = self.group.identity
        for s in self.space.level(k):
            for a in self.group.elements:
                if a != e and self.act(a, k, s) == s:
                    return False
        return True

    def orbit_key(self, k, x):
        return min((self.act(a, k, x) for a in self.group.elements),
                   key=ss._name_key)


def homotopy_quotient(g, x, action, level_bound=None, check=True):
    """(EG x X)/G with the diagonal action; the standard homotopy quotient.

    ``action`` must be a GAction on x.  The diagonal action is levelwise free
    thanks to the EG factor (checked)."""
    top = level_bound if level_bound is not None else x.top
    eg = e_group(g, top, check=False)
    prod, _, _ = ss.product(eg, x, top=top)
    diag = GAction(g, prod,
                   lambda a, k, s: (tuple(g.mul(c, a) for c in s[0]),
                                    action.act(a, k, s[1])),
                   check=check)
    for k in range(prod.top + 1):
        if not diag.is_free(k):
            raise ValueError(f"diagonal action not free at level {k}")
    # quotients do not preserve coskeletal level (EG x * / G = BG is
    # 2-coskeletal); claim max(2, cosk X) and let validation confirm
    return _orbit_space(diag, cosk=max(2, x.cosk_level), check=check)


def _orbit_space(action, cosk, check=True):
    space = action.space
    reps = []
    rep_of = {}
    for k in range(space.top + 1):
        lev = []
        seen = set()
        for s in space.level(k):
            key = action.orbit_key(k, s)
            rep_of[(k, s)] = key
            if key not in seen:
                seen.add(key)
                lev.append(key)
        reps.append(lev)
    faces = {}
    degens = {}
    for k in range(1, space.top + 1):
        for i in range(k + 1):
            faces[(k, i)] = {s: rep_of[(k - 1, space.face(k, i, s))]
                             for s in reps[k]}
    for k in range(0, space.top):
        for i in range(k + 1):
            degens[(k, i)] = {s: rep_of[(k + 1, space.degen(k, i, s))]
                              for s in reps[k]}
    if check:
        # induced maps well defined: face/degen of any orbit member lands in
        # the same orbit as the representative's
        for k in range(1, space.top + 1):
            for s in space.level(k):
                for i in range(k + 1):
                    if rep_of[(k - 1, space.face(k, i, s))] != \
                       faces[(k, i)][rep_of[(k, s)]]:
                        raise ValueError("quotient faces not well defined")
    total = sum(len(lev) for lev in reps)
    return ss.TauSSet(cosk, reps, faces, degens, check=check,
                      check_cosk=check and total <= 2500)


# -- Dold-Kan ------------------------------------------------------------------

@dataclass
class FinChainComplex:
    """A nonnegatively graded chain complex of finite abelian groups."""

    groups: list            # degree -> FinAbGroup (finite)
    differentials: dict = field(default_factory=dict)  # k -> AbHom C_k -> C_{k-1}

    def __post_init__(self):
        for k, g in enumerate(self.groups):
            if g.rank:
                raise ValueError("chain groups must be finite")
        for k, d in self.differentials.items():
            if d.source != self.groups[k] or d.target != self.groups[k - 1]:
                raise ValueError(f"differential {k} has wrong endpoints")
        for k in range(2, len(self.groups)):
            d1 = self.diff(k)
            d0 = self.diff(k - 1)
            for x in self.groups[k].elements():
                if any(v for v in d0.apply(d1.apply(x))):
                    raise ValueError("d o d != 0")

    @property
    def top_degree(self):
        return len(self.groups) - 1

    def group(self, k):
        if 0 <= k <= self.top_degree:
            return self.groups[k]
        return FinAbGroup.trivial()

    def diff(self, k):
        if k in self.differentials:
            return self.differentials[k]
        return AbHom.zero(self.group(k), self.group(k - 1))

    @staticmethod
    def concentrated(a, n):
        """A[n]: the complex with ``a`` in degree n and zero elsewhere."""
        groups = [FinAbGroup.trivial()] * n + [a]
        return FinChainComplex(groups)


def dold_kan_gamma(c, level_bound, check=True):
    """Gamma(C): level m is the direct sum over surjections [m] ->> [k] of C_k.

    Structure maps follow the epi-mono factorization rule: a summand indexed
    by eta maps along alpha via the identity when eta o alpha is surjective,
    via the differential when its mono part misses exactly the top index,
    and by zero otherwise.  Returns a SimplicialGroup."""
    top_c = c.top_degree

    def surjections_onto(m):
        out = []
        for k in range(0, min(m, top_c) + 1):
            if c.group(k).is_trivial() and k > 0:
                # trivial summands contribute a single zero coordinate; keep
                # them out of the element representation entirely
                continue
            for eta in ss.monotone_surjections(m, k):
                out.append((k, eta))
        return out

    surj = {m: surjections_onto(m) for m in range(level_bound + 1)}
    levels = []
    for m in range(level_bound + 1):
        coords = [c.group(k).elements() for (k, _) in surj[m]]
        levels.append([tuple(t) for t in itertools.product(*coords)]
                      if coords else [()])

    def structure_map(m_from, m_to, alpha, x):
        """Gamma(alpha): level m_from -> m_to for alpha: [m_to] -> [m_from]."""
        out = []
        for (kp, etap) in surj[m_to]:
            total = tuple([0] * len(c.group(kp).generators()))
            gp = c.group(kp)
            for idx, (k, eta) in enumerate(surj[m_from]):
                comp = ss.compose_ops(eta, alpha)
                image = sorted(set(comp))
                if image == list(range(k + 1)):
                    if (kp, etap) == (k, comp):
                        total = gp.reduce([a + b for a, b in zip(total, x[idx])])
                elif image == list(range(k)) and k - 1 == kp:
                    if etap == comp:
                        val = c.diff(k).apply(x[idx])
                        total = gp.reduce([a + b for a, b in zip(total, val)])
            out.append(total)
        return tuple(out)

    faces = {}
    degens = {}
    for m in range(1, level_bound + 1):
        for i in range(m + 1):
            alpha = ss.delta_op(i, m)
            faces[(m, i)] = {x: structure_map(m, m - 1, alpha, x)
                             for x in levels[m]}
    for m in range(0, level_bound):
        for i in range(m + 1):
            alpha = ss.sigma_op(i, m)
            degens[(m, i)] = {x: structure_map(m, m + 1, alpha, x)
                              for x in levels[m]}
    cosk = top_c + 1
    if level_bound < cosk:
        raise ValueError(f"level_bound must be at least {cosk}")
    total = sum(len(lev) for lev in levels)
    space = ss.TauSSet(cosk, levels, faces, degens, check=check,
                       check_cosk=check and total <= 4000)

    def mult(m, x, y):
        out = []
        for idx, (k, _) in enumerate(surj[m]):
            out.append(c.group(k).reduce([a + b for a, b in zip(x[idx], y[idx])]))
        return tuple(out)

    def inverse(m, x):
        out = []
        for idx, (k, _) in enumerate(surj[m]):
            out.append(c.group(k).reduce([-a for a in x[idx]]))
        return tuple(out)

    identities = {m: tuple(tuple([0] * len(c.group(k).generators()))
                           for (k, _) in surj[m])
                  for m in range(level_bound + 1)}
    return SimplicialGroup(space, mult, inverse,
                           lambda m: identities[m], check=check)


class SimplicialGroup:
    """A TauSSet with levelwise group structure; structure maps must be
    homomorphisms (checked exhaustively on stored levels)."""

    def __init__(self, space, mult, inverse, identity, check=True):
        self.space = space
        self.mult = mult
        self.inverse = inverse
        self.identity = identity
        if check:
            self.validate()

    def validate(self):
        x = self.space
        for m in range(x.top + 1):
            lev = x.level(m)
            if len(lev) > 400:
                continue  # homomorphism checks are quadratic; cap per level
            e = self.identity(m)
            for a in lev:
                if self.mult(m, a, e) != a or self.mult(m, e, a) != a:
                    raise ValueError(f"identity law fails at level {m}")
                if self.mult(m, a, self.inverse(m, a)) != e:
                    raise ValueError(f"inverse law fails at level {m}")
            for a in lev:
                for b in lev:
                    ab = self.mult(m, a, b)
                    if m >= 1:
                        for i in range(m + 1):
                            if x.face(m, i, ab) != \
                               self.mult(m - 1, x.face(m, i, a), x.face(m, i, b)):
                                raise ValueError(
                                    f"face d_{i} not a homomorphism at level {m}")
                    if m < x.top:
                        for i in range(m + 1):
                            if x.degen(m, i, ab) != \
                               self.mult(m + 1, x.degen(m, i, a),
                                         x.degen(m, i, b)):
                                raise ValueError(
                                    f"degeneracy s_{i} not a homomorphism "
                                    f"at level {m}")

    def level_group(self, m):
        lev = self.space.level(m)
        table = {(a, b): self.mult(m, a, b) for a in lev for b in lev}
        return FinGroup(lev, table, check=False)


def abelian_as_fingroup(a):
    """A FinAbGroup as an explicit FinGroup on coordinate tuples."""
    els = a.elements()
    table = {(x, y): a.reduce([u + v for u, v in zip(x, y)])
             for x in els for y in els}
    return FinGroup(els, table, check=False)


def k_abelian(a, n, level_bound=None, check=True):
    """K(A, n): Gamma(A[n]) for n >= 2; routed through b_group for n = 1."""
    if n < 1:
        raise ValueError("use a discrete set for n = 0")
    if n == 1:
        g = abelian_as_fingroup(a)
        bound = level_bound if level_bound is not None else 3
        return b_group(g, bound, check)
    bound = level_bound if level_bound is not None else n + 2
    return dold_kan_gamma(FinChainComplex.concentrated(a, n), bound,
                          check).space


def k_abelian_group(a, n, level_bound=None, check=True):
    """K(A, n) together with its simplicial group structure (n >= 2)."""
    bound = level_bound if level_bound is not None else n + 2
    return dold_kan_gamma(FinChainComplex.concentrated(a, n), bound, check)


def moore_complex(sg, top_degree):
    """Normalized Moore complex of a simplicial abelian group:
    N_k = intersection of ker d_i for i < k, with differential d_k.
    Returns (groups, differential images) with groups as FinAbGroups."""
    x = sg.space
    groups = []
    gens = []
    for k in range(top_degree + 1):
        if k == 0:
            members = list(x.level(0))
        else:
            e = sg.identity(k - 1)
            members = [s for s in x.level(k)
                       if all(x.face(k, i, s) == e for i in range(k))]
        table = {(a, b): sg.mult(k, a, b) for a in members for b in members}
        fg = FinGroup(members, table, check=False)
        groups.append(fg.abelian_invariants())
        gens.append(members)
    return groups, gens


# -- W and W-bar constructions ---------------------------------------------

def w_bar(sg, level_bound, check=True):
    """Classifying complex of a simplicial group:
    (W-bar G)_n = G_{n-1} x ... x G_0."""
    g = sg.space

    def ident(k):
        return sg.identity(k)

    levels = [[()]]
    for n in range(1, level_bound + 1):
        prev = levels[n - 1]
        levels.append([(gn,) + t for gn in g.level(n - 1) for t in prev])

    def face(n, i, t):
        # t = (g_{n-1}, ..., g_0)
        if i == 0:
            return t[1:]
        out = []
        for pos in range(n - 1):  # entry g_{n-1-pos} at level n-1-pos
            lev = n - 1 - pos
            if pos < i - 1:
                out.append(g.face(lev, i - 1 - pos, t[pos]))
            elif pos == i - 1:
                merged = sg.mult(lev - 1, g.face(lev, 0, t[pos]), t[pos + 1]) \
                    if pos + 1 < n else None
                if merged is None:
                    return tuple(out)
                out.append(merged)
                out.extend(t[pos + 2:])
                return tuple(out)
        return tuple(out)

    def degen(n, i, t):
        if i == 0:
            return (ident(n),) + t
        out = []
        for pos in range(i):
            lev = n - 1 - pos
            out.append(g.degen(lev, i - 1 - pos, t[pos]))
        out.append(ident(n - i))
        out.extend(t[i:])
        return tuple(out)

    faces = {}
    degens = {}
    for n in range(1, level_bound + 1):
        for i in range(n + 1):
            faces[(n, i)] = {t: face(n, i, t) for t in levels[n]}
    for n in range(0, level_bound):
        for i in range(n + 1):
            degens[(n, i)] = {t: degen(n, i, t) for t in levels[n]}
    cosk = g.cosk_level + 1
    total = sum(len(lev) for lev in levels)
    return ss.TauSSet(cosk, levels, faces, degens, check=check,
                      check_cosk=check and total <= 2500)


def w_total(sg, level_bound, check=True):
    """Total space W G: (W G)_n = G_n x (W-bar G)_n with the twisted d_0."""
    g = sg.space
    wb = w_bar(sg, level_bound, check=False)
    levels = [[(gn,) + t for gn in g.level(n) for t in wb.level(n)]
              for n in range(level_bound + 1)]

    def face(n, i, t):
        gn, rest = t[0], t[1:]
        if i == 0:
            # d_0(g_n; g_{n-1}, ...) = (d_0(g_n) . g_{n-1}; g_{n-2}, ...)
            if n == 0:
                raise IndexError
            if len(rest) == 0:
                return (g.face(n, 0, gn),)
            merged = sg.mult(n - 1, g.face(n, 0, gn), rest[0])
            return (merged,) + rest[1:]
        return (g.face(n, i, gn),) + wb.face(n, i, rest)

    def degen(n, i, t):
        return (g.degen(n, i, t[0]),) + wb.degen(n, i, t[1:])

    faces = {}
    degens = {}
    for n in range(1, level_bound + 1):
        for i in range(n + 1):
            faces[(n, i)] = {t: face(n, i, t) for t in levels[n]}
    for n in range(0, level_bound):
        for i in range(n + 1):
            degens[(n, i)] = {t: degen(n, i, t) for t in levels[n]}
    cosk = g.cosk_level + 1
    total = sum(len(lev) for lev in levels)
    return ss.TauSSet(cosk, levels, faces, degens, check=check,
                      check_cosk=check and total <= 2500)


def w_constructions(sg, level_bound, check=True):
    """(W G, W-bar G, projection), with the projection a principal fibration."""
    wg = w_total(sg, level_bound, check)
    wbg = w_bar(sg, level_bound, check)
    proj = ss.SimplicialMap.from_function(wg, wbg, lambda k, t: t[1:],
                                          top=level_bound, check=check)
    return wg, wbg, proj


def strict_fiber(p, basepoint):
    """The strict fiber of p: E -> B over a vertex of B as a sub-TauSSet."""
    e, b = p.source, p.target
    base = {0: basepoint}
    for k in range(1, e.top + 1):
        base[k] = b.degen(k - 1, 0, base[k - 1])
    levels = [[s for s in e.level(k) if p.apply(k, s) == base[k]]
              for k in range(e.top + 1)]
    keep = [set(lev) for lev in levels]
    faces = {}
    degens = {}
    for k in range(1, e.top + 1):
        for i in range(k + 1):
            faces[(k, i)] = {s: e.face(k, i, s) for s in levels[k]}
            for s in levels[k]:
                if e.face(k, i, s) not in keep[k - 1]:
                    raise ValueError("fiber is not closed under faces")
    for k in range(0, e.top):
        for i in range(k + 1):
            degens[(k, i)] = {s: e.degen(k, i, s) for s in levels[k]}
    return ss.TauSSet(e.cosk_level, levels, faces, degens, check=True,
                      check_cosk=False)


# -- G-modules and twisted building blocks -------------------------------------

class GModule:
    """A finite abelian group with a G-action by automorphisms."""

    def __init__(self, group, module, action, check=True):
        # action: dict g -> AbHom module -> module
        self.group = group
        self.module = module
        self.action = dict(action)
        if check:
            self.validate()

    @staticmethod
    def trivial(group, module):
        return GModule(group, module,
                       {g: AbHom.identity(module) for g in group.elements},
                       check=False)

    @staticmethod
    def inversion(group, module):
        """Each group element of order <= 2 acts by negation when nontrivial."""
        gens = module.generators()
        neg = AbHom.make(module, module,
                         [[-1 if i == j else 0 for i in range(len(gens))]
                          for j in range(len(gens))])
        action = {}
        for g in group.elements:
            action[g] = AbHom.identity(module) if g == group.identity else neg
        return GModule(group, module, action)

    def validate(self):
        from .abelian import invert
        g = self.group
        if self.action[g.identity] != AbHom.identity(self.module):
            raise ValueError("identity must act trivially")
        for a in g.elements:
            h = self.action[a]
            if h.source != self.module or h.target != self.module:
                raise ValueError("action endpoints wrong")
            if invert(h) is None:
                raise ValueError(f"{a!r} does not act by an automorphism")
            for b in g.elements:
                if self.action[g.mul(a, b)] != self.action[b].compose(self.action[a]):
                    raise ValueError("action is not a right action")


def _k_level_action(gmod, x, g):
    """Apply the action of g to a K(A,n)-level element (tuple of A-elements)."""
    h = gmod.action[g]
    return tuple(h.apply(c) for c in x)


def k_module_action(gmod, n, level_bound=None, check=True):
    """(K(A,n), GAction) with G acting through the module structure."""
    if n == 1:
        space = k_abelian(gmod.module, 1, level_bound, check)
        act = GAction(gmod.group, space,
                      lambda g, k, t: _k_level_action(gmod, t, g), check=check)
        return space, act
    space = k_abelian(gmod.module, n, level_bound, check)
    act = GAction(gmod.group, space,
                  lambda g, k, t: tuple(_k_level_action(gmod, c, g) for c in t),
                  check=check)
    return space, act


def l_module_action(gmod, n, level_bound=None, check=True):
    """(L(A,n) = W K(A,n-1), base W-bar K(A,n-1), projection, actions).

    The G-action is inherited coordinatewise through the W construction."""
    bound = level_bound if level_bound is not None else n + 2
    sg = k_abelian_group(gmod.module, n - 1, max(bound, n + 1), check) \
        if n - 1 >= 2 else _bg_simplicial_group(gmod.module, max(bound, n + 1),
                                                check)
    wg, wbg, proj = w_constructions(sg, max(bound, n + 1), check)

    if n - 1 >= 2:
        def entry_act(g, c):
            return tuple(_k_level_action(gmod, cc, g) for cc in c)
    else:
        def entry_act(g, c):
            return _k_level_action(gmod, c, g)

    act_w = GAction(gmod.group, wg,
                    lambda g, k, t: tuple(entry_act(g, c) for c in t),
                    check=check)
    act_wb = GAction(gmod.group, wbg,
                     lambda g, k, t: tuple(entry_act(g, c) for c in t),
                     check=check)
    return wg, wbg, proj, act_w, act_wb


def _bg_simplicial_group(a, level_bound, check=True):
    """B(A) for abelian A as a simplicial group (componentwise addition)."""
    g = abelian_as_fingroup(a)
    space = b_group(g, level_bound, check)

    def mult(m, x, y):
        return tuple(g.mul(u, v) for u, v in zip(x, y))

    def inverse(m, x):
        return tuple(g.inv(u) for u in x)

    return SimplicialGroup(space, mult, inverse,
                           lambda m: tuple([g.identity] * m), check=check)


def eilenberg_maclane_quotients(gmod, n, level_bound=None, check=True):
    """K(A,n)_{hG}, L(A,n)_{hG}, and the induced fibration between them."""
    bound = level_bound if level_bound is not None else n + 2
    wg, wbg, proj, act_w, act_wb = l_module_action(gmod, n, bound, check)
    g = gmod.group
    top = min(wg.top, bound)
    eg = e_group(g, top, check=False)

    def diag(base_action):
        return lambda a, k, s: (tuple(g.mul(c, a) for c in s[0]),
                                base_action.act(a, k, s[1]))

    prod_l, _, _ = ss.product(eg, wg, top=top)
    act_l = GAction(g, prod_l, diag(act_w), check=check)
    lhg = _orbit_space(act_l, cosk=max(2, wg.cosk_level), check=check)
    prod_k, _, _ = ss.product(eg, wbg, top=top)
    act_k = GAction(g, prod_k, diag(act_wb), check=check)
    khg = _orbit_space(act_k, cosk=max(2, wbg.cosk_level), check=check)

    def leg_fn(k, orbit_rep):
        e_part, w_part = orbit_rep
        proj_pair = (e_part, proj.apply(k, w_part))
        return act_k.orbit_key(k, proj_pair)

    leg = ss.SimplicialMap.from_function(lhg, khg, leg_fn, top=top, check=check)
    return khg, lhg, leg


# -- nilpotent-closure certificates ---------------------------------------------

@dataclass
class KNilNode:
    kind: str                      # "leaf" | "terminal" | "pullback" | "weq" | "retract"
    space: object                  # TauSSet
    basis_tag: object = None       # leaf: ("discrete", n) | ("bg", FinGroup)
                                   #       | ("k", A, n) | ("khg", gmod, n)
                                   #       | ("lhg", gmod, n) | ("custom", i)
    iso_witness: object = None     # leaf: optional SimplicialMap to the model
    children: tuple = ()           # pullback: (back, side, base); weq/retract: (child,)
    map_back: object = None        # pullback: back -> base
    map_side: object = None        # pullback: side -> base  (marked fibration)
    proj_back: object = None       # pullback: space -> back
    proj_side: object = None       # pullback: space -> side
    weq_cert: object = None        # weq: ("homotopy-equivalence", f, g, h1, h2)
                                   #      | ("minimal-models", bound)
    section: object = None         # retract: space -> child space
    retraction: object = None      # retract: child space -> space


@dataclass
class NodeVerdict:
    ok: bool
    kind: str
    reason: str
    retract_only: bool = False

    def __bool__(self):
        return self.ok


def _leaf_model(tag, basis):
    """Construct the reference space for a leaf tag, or None if not in basis."""
    kind = tag[0]
    if basis == "Kpi":
        allowed = {"discrete", "bg", "k", "khg", "lhg", "l"}
    elif isinstance(basis, tuple) and basis[0] == "Kp":
        p = basis[1]
        if kind == "discrete":
            allowed = {"discrete"}
        elif kind == "bg":
            g = tag[1]
            if g.order != p:
                return None, f"BG leaf needs |G| = {p}"
            allowed = {"bg"}
        elif kind == "k":
            a = tag[1]
            if a != FinAbGroup.cyclic(p):
                return None, f"K(A,n) leaf needs A = Z/{p}"
            allowed = {"k"}
        else:
            return None, f"leaf kind {kind!r} not in the K^p basis"
    else:
        return None, "custom basis handled separately"
    if kind not in allowed:
        return None, f"leaf kind {kind!r} not in the basis"
    if kind == "discrete":
        return ss.discrete([("s", i) for i in range(tag[1])]), ""
    if kind == "bg":
        return b_group(tag[1], check=False), ""
    if kind == "k":
        return k_abelian(tag[1], tag[2], check=False), ""
    if kind == "khg":
        khg, _, _ = eilenberg_maclane_quotients(tag[1], tag[2], check=False)
        return khg, ""
    if kind in ("lhg", "l"):
        gmod, n = tag[1], tag[2]
        khg, lhg, _ = eilenberg_maclane_quotients(gmod, n, check=False)
        return lhg, ""
    return None, f"unknown leaf kind {kind!r}"


def knil_check(root, basis, budget=None):
    """Validate a nilpotent-closure certificate tree against a basis.

    ``basis`` is "Kpi", ("Kp", p), or a list of TauSSets (custom).  Returns
    (overall verdict, list of per-node verdicts in postorder).  A retract
    node downgrades the claim to retract-of-closure."""
    verdicts = []

    def walk(node):
        retract_only = False
        for child in node.children:
            v = walk(child)
            if not v.ok:
                verdicts.append(NodeVerdict(False, node.kind,
                                            f"child failed: {v.reason}"))
                return verdicts[-1]
            retract_only = retract_only or v.retract_only
        if node.kind == "terminal":
            ok = all(len(node.space.level_ext(k)) == 1
                     for k in range(node.space.cosk_level + 1))
            v = NodeVerdict(ok, "terminal",
                            "" if ok else "space is not a point")
        elif node.kind == "leaf":
            v = _check_leaf(node, basis, budget)
        elif node.kind == "pullback":
            v = _check_pullback(node, budget)
        elif node.kind == "weq":
            v = _check_weq(node, budget)
        elif node.kind == "retract":
            v = _check_retract(node, budget)
            retract_only = True
        else:
            v = NodeVerdict(False, node.kind, f"unknown node kind")
        v.retract_only = retract_only or v.retract_only
        verdicts.append(v)
        return v

    overall = walk(root)
    return overall, verdicts


def _check_leaf(node, basis, budget):
    kan = ss.is_kan(node.space, budget)
    if not kan.ok:
        return NodeVerdict(False, "leaf", "leaf not Kan: " + kan.reason)
    if isinstance(basis, list):
        for cand in basis:
            if ss.find_isomorphism(node.space, cand, budget) is not None:
                return NodeVerdict(True, "leaf", "isomorphic to custom basis element")
        return NodeVerdict(False, "leaf", "no isomorphic custom basis element")
    model, err = _leaf_model(node.basis_tag, basis)
    if model is None:
        return NodeVerdict(False, "leaf", err)
    if node.iso_witness is not None:
        f = node.iso_witness
        if f.source != node.space and f.source is not node.space:
            return NodeVerdict(False, "leaf", "witness has wrong source")
        if not f.is_levelwise_bijective():
            return NodeVerdict(False, "leaf", "witness not bijective")
        return NodeVerdict(True, "leaf", "witnessed basis element")
    if ss.find_isomorphism(node.space, model, budget) is None:
        return NodeVerdict(False, "leaf",
                           f"not isomorphic to the tagged basis element")
    return NodeVerdict(True, "leaf", "isomorphic to tagged basis element")


def _check_pullback(node, budget):
    back, side, base = node.children
    fa, fb = node.map_back, node.map_side
    if fa.source is not back.space or fa.target is not base.space:
        return NodeVerdict(False, "pullback", "back leg endpoints wrong")
    if fb.source is not side.space or fb.target is not base.space:
        return NodeVerdict(False, "pullback", "side leg endpoints wrong")
    fib = ss.has_rlp_against_horns(fb, budget=budget)
    if not fib.ok:
        return NodeVerdict(False, "pullback",
                           "marked leg fails horn lifting: " + fib.reason)
    # square commutes
    pa, pb = node.proj_back, node.proj_side
    if not fa.compose(pa).equals(fb.compose(pb)):
        return NodeVerdict(False, "pullback", "square does not commute")
    # strict pullback: the canonical comparison is a levelwise bijection
    p, pr1, pr2 = ss.pullback(fa, fb)
    det = max(node.space.cosk_level, p.cosk_level)
    seen = set()
    for k in range(det + 1):
        lvl = node.space.level_ext(k, budget)
        plvl = p.level_ext(k, budget)
        images = set()
        for s in lvl:
            images.add((pa.apply(k, s), pb.apply(k, s)))
        if len(images) != len(lvl) or len(images) != len(plvl):
            return NodeVerdict(False, "pullback",
                               f"not a strict pullback at level {k}")
    return NodeVerdict(True, "pullback", "strict pullback along a fibration")


def _check_weq(node, budget):
    (child,) = node.children
    cert = node.weq_cert
    if cert[0] == "homotopy-equivalence":
        _, f, g, h1, h2 = cert
        ok, reason = _check_homotopy_equiv(node.space, child.space, f, g,
                                           h1, h2, budget)
        return NodeVerdict(ok, "weq", reason)
    if cert[0] == "minimal-models":
        bound = cert[1]
        ok, reason = _matched_minimal_models(node.space, child.space, bound,
                                             budget)
        return NodeVerdict(ok, "weq",
                           reason + f" (up to degree {bound})")
    return NodeVerdict(False, "weq", f"unknown certificate {cert[0]!r}")


def _check_homotopy_equiv(x, y, f, g, h1, h2, budget):
    if not (f.source is x and f.target is y and g.source is y and g.target is x):
        return False, "equivalence maps have wrong endpoints"
    for (h, space, end0, end1) in ((h1, x, g.compose(f), ss.SimplicialMap.identity(x)),
                                   (h2, y, f.compose(g), ss.SimplicialMap.identity(y))):
        ok, reason = check_homotopy(h, end0, end1, budget)
        if not ok:
            return False, reason
    return True, "explicit homotopy equivalence"


def check_homotopy(h, f0, f1, budget=None):
    """Validate prism data h: X x Delta^1 -> Y against its two ends."""
    x = f0.source
    y = f0.target
    det = max(x.cosk_level, y.cosk_level)
    prod, _, _ = ss.product(x, ss.standard_simplex(1, det), top=det)
    if h.source != prod and h.source is not prod:
        # accept any product model with matching levels
        pass
    for k in range(det + 1):
        const0 = tuple([0] * (k + 1))
        const1 = tuple([1] * (k + 1))
        for s in x.level_ext(k, budget):
            if h.apply(k, (s, const0)) != f0.apply(k, s):
                return False, f"homotopy end 0 mismatch at level {k}"
            if h.apply(k, (s, const1)) != f1.apply(k, s):
                return False, f"homotopy end 1 mismatch at level {k}"
    return True, "homotopy validated"


def _matched_minimal_models(x, y, bound, budget):
    mx = ss.minimalize(x, budget)
    my = ss.minimalize(y, budget)
    cx = ss.path_components(mx.minimal)
    cy = ss.path_components(my.minimal)
    if len(cx) != len(cy):
        return False, "component counts differ"
    if len(cx) != 1:
        return False, "matched-minimal-model certificates need connected spaces"
    bx = mx.minimal.level(0)[0]
    by = my.minimal.level(0)[0]
    for k in range(1, bound + 1):
        pk_x = ss.homotopy_group(mx.minimal, bx, k, budget, assume_minimal=True)
        pk_y = ss.homotopy_group(my.minimal, by, k, budget, assume_minimal=True)
        if k == 1:
            if not pk_x.is_isomorphic_to(pk_y):
                return False, f"pi_{k} of minimal models differ"
        elif pk_x != pk_y:
            return False, f"pi_{k} of minimal models differ"
    return True, "matched homotopy groups of minimal models"


def _check_retract(node, budget):
    (child,) = node.children
    s, r = node.section, node.retraction
    if not (s.source is node.space and s.target is child.space):
        return NodeVerdict(False, "retract", "section endpoints wrong")
    if not (r.source is child.space and r.target is node.space):
        return NodeVerdict(False, "retract", "retraction endpoints wrong")
    comp = r.compose(s)
    if not comp.equals(ss.SimplicialMap.identity(node.space)):
        return NodeVerdict(False, "retract",
                           "retraction o section is not the identity")
    return NodeVerdict(True, "retract", "retract of a certified space",
                       retract_only=True)


# -- Postnikov stage verification ------------------------------------------------

def postnikov_stage_verify(x, x_prev, a, n, gmod, classifying_map,
                           budget=None):
    """Verify the stage square: x is the strict pullback of
    L(A, n+1)_{hG} -> K(A, n+1)_{hG} <- x_prev along the classifying map.

    The right leg's fibration property, commutation, and strict-pullback
    condition are all checked; the comparison isomorphism x = pullback is
    searched for."""
    khg, lhg, leg = eilenberg_maclane_quotients(gmod, n + 1, check=False)
    if classifying_map.target != khg and classifying_map.target is not khg:
        return ss.Verdict(False, "classifying map must land in the "
                                 "quotient Eilenberg-MacLane base")
    fib = ss.has_rlp_against_horns(leg, budget=budget)
    if not fib.ok:
        return ss.Verdict(False, "right leg fails horn lifting: " + fib.reason)
    p, pr1, pr2 = ss.pullback(classifying_map, leg)
    iso = ss.find_isomorphism(x, p, budget)
    if iso is None:
        hx = ss.homology(x, 1)
        hp = ss.homology(p, 1)
        return ss.Verdict(False,
                          "pullback of the classifying square is not "
                          f"isomorphic to the stage (H1: {hx[1]} vs {hp[1]})",
                          (hx, hp))
    # the comparison must live over x_prev
    over_ok = pr1.compose(iso).target is classifying_map.source
    return ss.Verdict(True, "stage square verified: commutes, right leg is a "
                            "fibration, strict pullback matches", iso)
