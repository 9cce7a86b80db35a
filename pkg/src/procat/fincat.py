"""Finite categories with explicit composition tables.

Everything is extensional: axioms, cofilteredness, coinitiality, cones and
limits are decided by enumeration.  Posets are viewed as categories with a
single morphism u -> v whenever u >= v.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import sset as ssetmod


class CategoryError(Exception):
    pass


@dataclass(frozen=True)
class FinCategory:
    objects: tuple
    morphisms: tuple
    dom: dict = field(hash=False)
    cod: dict = field(hash=False)
    identity: dict = field(hash=False)
    compose: dict = field(hash=False)  # (g, f) -> g o f, defined when cod f = dom g

    def __post_init__(self):
        self.validate()

    def validate(self):
        objs = set(self.objects)
        mors = set(self.morphisms)
        if len(objs) != len(self.objects) or len(mors) != len(self.morphisms):
            raise CategoryError("duplicate object or morphism ids")
        for m in self.morphisms:
            if self.dom[m] not in objs or self.cod[m] not in objs:
                raise CategoryError(f"morphism {m!r} has bad endpoints")
        for o in self.objects:
            i = self.identity[o]
            if self.dom[i] != o or self.cod[i] != o:
                raise CategoryError(f"identity of {o!r} has bad endpoints")
        for g in self.morphisms:
            for f in self.morphisms:
                defined = (g, f) in self.compose
                composable = self.cod[f] == self.dom[g]
                if defined != composable:
                    raise CategoryError(
                        f"composition table wrong at ({g!r}, {f!r})")
                if defined:
                    gf = self.compose[(g, f)]
                    if self.dom[gf] != self.dom[f] or self.cod[gf] != self.cod[g]:
                        raise CategoryError(
                            f"composite {gf!r} has mismatched endpoints")
        for f in self.morphisms:
            if self.compose[(f, self.identity[self.dom[f]])] != f:
                raise CategoryError(f"right unit law fails at {f!r}")
            if self.compose[(self.identity[self.cod[f]], f)] != f:
                raise CategoryError(f"left unit law fails at {f!r}")
        for h in self.morphisms:
            for g in self.morphisms:
                if self.cod[g] != self.dom[h]:
                    continue
                for f in self.morphisms:
                    if self.cod[f] != self.dom[g]:
                        continue
                    if self.compose[(self.compose[(h, g)], f)] != \
                       self.compose[(h, self.compose[(g, f)])]:
                        raise CategoryError(
                            f"associativity fails at ({h!r}, {g!r}, {f!r})")

    def hom(self, a, b):
        return [m for m in self.morphisms
                if self.dom[m] == a and self.cod[m] == b]

    def comp(self, g, f):
        return self.compose[(g, f)]

    def into(self, a):
        return [m for m in self.morphisms if self.cod[m] == a]

    def is_iso(self, f):
        for g in self.hom(self.cod[f], self.dom[f]):
            if self.comp(g, f) == self.identity[self.dom[f]] and \
               self.comp(f, g) == self.identity[self.cod[f]]:
                return True
        return False


@dataclass(frozen=True)
class FinFunctor:
    source: FinCategory
    target: FinCategory
    obj_map: dict = field(hash=False)
    mor_map: dict = field(hash=False)

    def __post_init__(self):
        self.validate()

    def validate(self):
        for o in self.source.objects:
            if self.obj_map[o] not in self.target.objects:
                raise CategoryError(f"object image missing for {o!r}")
        for m in self.source.morphisms:
            fm = self.mor_map[m]
            if self.target.dom[fm] != self.obj_map[self.source.dom[m]]:
                raise CategoryError(f"functor breaks dom at {m!r}")
            if self.target.cod[fm] != self.obj_map[self.source.cod[m]]:
                raise CategoryError(f"functor breaks cod at {m!r}")
        for o in self.source.objects:
            if self.mor_map[self.source.identity[o]] != \
               self.target.identity[self.obj_map[o]]:
                raise CategoryError(f"functor breaks identity at {o!r}")
        for g in self.source.morphisms:
            for f in self.source.morphisms:
                if self.source.cod[f] != self.source.dom[g]:
                    continue
                if self.mor_map[self.source.comp(g, f)] != \
                   self.target.comp(self.mor_map[g], self.mor_map[f]):
                    raise CategoryError(
                        f"functor breaks composition at ({g!r}, {f!r})")

    def on_obj(self, o):
        return self.obj_map[o]

    def on_mor(self, m):
        return self.mor_map[m]


@dataclass(frozen=True)
class FinPoset:
    elements: tuple
    leq: frozenset  # pairs (a, b) with a <= b

    def __post_init__(self):
        els = set(self.elements)
        for (a, b) in self.leq:
            if a not in els or b not in els:
                raise CategoryError("order relation off the element set")
        for a in els:
            if (a, a) not in self.leq:
                raise CategoryError(f"order not reflexive at {a!r}")
        for (a, b) in self.leq:
            if a != b and (b, a) in self.leq:
                raise CategoryError(f"order not antisymmetric at {(a, b)!r}")
        for (a, b) in self.leq:
            for (c, d) in self.leq:
                if b == c and (a, d) not in self.leq:
                    raise CategoryError(
                        f"order not transitive at {(a, b, d)!r}")

    def le(self, a, b):
        return (a, b) in self.leq

    def strictly_below(self, t):
        return [s for s in self.elements if s != t and self.le(s, t)]

    @staticmethod
    def from_le(elements, le):
        pairs = frozenset((a, b) for a in elements for b in elements
                          if le(a, b))
        return FinPoset(tuple(elements), pairs)

    @staticmethod
    def chain(n):
        return FinPoset.from_le(range(n), lambda a, b: a <= b)

    @staticmethod
    def divisors(n):
        els = [d for d in range(1, n + 1) if n % d == 0]
        return FinPoset.from_le(els, lambda a, b: b % a == 0)


# -- constructors -------------------------------------------------------------

def make_category(objects, morphism_spec, compose_rule):
    """Build a FinCategory from non-identity morphisms and a composition rule.

    ``morphism_spec``: iterable of (id, dom, cod); identities are added as
    ("id", obj).  ``compose_rule(g, f)`` must return the composite id for
    non-identity pairs.
    """
    objects = tuple(objects)
    idmap = {o: ("id", o) for o in objects}
    morphisms = list(idmap.values())
    dom = {idmap[o]: o for o in objects}
    cod = {idmap[o]: o for o in objects}
    for (mid, d, c) in morphism_spec:
        morphisms.append(mid)
        dom[mid] = d
        cod[mid] = c
    compose = {}
    for g in morphisms:
        for f in morphisms:
            if cod[f] != dom[g]:
                continue
            if f in idmap.values():
                compose[(g, f)] = g
            elif g in idmap.values():
                compose[(g, f)] = f
            else:
                compose[(g, f)] = compose_rule(g, f)
    return FinCategory(tuple(objects), tuple(morphisms), dom, cod,
                       idmap, compose)


def terminal_category():
    return make_category(["*"], [], None)


def discrete_category(objects):
    return make_category(objects, [], None)


def poset_category(poset):
    """Morphism (u, v): u -> v whenever u >= v."""
    mors = [((u, v), u, v) for u in poset.elements for v in poset.elements
            if u != v and poset.le(v, u)]
    return make_category(poset.elements, mors,
                         lambda g, f: (f[0], g[1]))


def group_category(group):
    """One-object category whose morphisms are the group elements."""
    mors = [(("g", a), "*", "*") for a in group.elements
            if a != group.identity]

    def comp(g, f):
        prod = group.mul(f[1], g[1])
        return ("id", "*") if prod == group.identity else ("g", prod)

    return make_category(["*"], mors, comp)


def opposite(c):
    compose = {(f, g): v for (g, f), v in c.compose.items()}
    return FinCategory(c.objects, c.morphisms, dict(c.cod), dict(c.dom),
                       dict(c.identity), compose)


def parallel_pair_category():
    """Two objects 0, 1 and two parallel arrows alpha, beta: 0 -> 1."""
    return make_category([0, 1], [("alpha", 0, 1), ("beta", 0, 1)], None)


# -- decision procedures -------------------------------------------------------

@dataclass
class CofilteredVerdict:
    ok: bool
    axiom: int = 0
    witness: object = None

    def __bool__(self):
        return self.ok


def check_cofiltered(c):
    """Nonempty; common sources for object pairs; equalizers by precomposition."""
    if not c.objects:
        return CofilteredVerdict(False, 1, None)
    for i in c.objects:
        for j in c.objects:
            found = False
            for k in c.objects:
                if c.hom(k, i) and c.hom(k, j):
                    found = True
                    break
            if not found:
                return CofilteredVerdict(False, 2, (i, j))
    for f in c.morphisms:
        for g in c.morphisms:
            if f == g or c.dom[f] != c.dom[g] or c.cod[f] != c.cod[g]:
                continue
            equalized = False
            for h in c.into(c.dom[f]):
                if c.comp(f, h) == c.comp(g, h):
                    equalized = True
                    break
            if not equalized:
                return CofilteredVerdict(False, 3, (f, g))
    return CofilteredVerdict(True)


class ConeExtensionError(Exception):
    def __init__(self, axiom, witness):
        super().__init__(f"cofilteredness axiom ({axiom}) failed at {witness!r}")
        self.axiom = axiom
        self.witness = witness


def cone_extension(f):
    """Extend a functor from a finite E to one from the left cone E^<.

    Two phases: repeated common sources over the objects, then repeated
    equalization over the morphisms.  Returns (cone functor, cone object,
    legs dict).
    """
    e, i_cat = f.source, f.target
    if not i_cat.objects:
        raise ConeExtensionError(1, None)
    if not e.objects:
        apex = i_cat.objects[0]
        legs = {}
    else:
        objs = list(e.objects)
        apex = f.on_obj(objs[0])
        legs = {objs[0]: i_cat.identity[apex]}
        for o in objs[1:]:
            target = f.on_obj(o)
            found = None
            for k in i_cat.objects:
                us = i_cat.hom(k, apex)
                vs = i_cat.hom(k, target)
                if us and vs:
                    found = (k, us[0], vs[0])
                    break
            if found is None:
                raise ConeExtensionError(2, (apex, target))
            k, u, v = found
            legs = {oo: i_cat.comp(m, u) for oo, m in legs.items()}
            legs[o] = v
            apex = k
        # equalization phase
        for _ in range(len(e.morphisms) + 1):
            violation = None
            for m in e.morphisms:
                src, tgt = e.dom[m], e.cod[m]
                if i_cat.comp(f.on_mor(m), legs[src]) != legs[tgt]:
                    violation = m
                    break
            if violation is None:
                break
            m = violation
            lhs = i_cat.comp(f.on_mor(m), legs[e.dom[m]])
            rhs = legs[e.cod[m]]
            h = None
            for cand in i_cat.into(apex):
                if i_cat.comp(lhs, cand) == i_cat.comp(rhs, cand):
                    h = cand
                    break
            if h is None:
                raise ConeExtensionError(3, (lhs, rhs))
            apex = i_cat.dom[h]
            legs = {oo: i_cat.comp(mm, h) for oo, mm in legs.items()}
        else:
            raise ConeExtensionError(3, "equalization did not terminate")

    cone_cat, incl_obj, incl_mor, tip = left_cone(e)
    obj_map = {incl_obj[o]: f.on_obj(o) for o in e.objects}
    obj_map[tip] = apex
    mor_map = {incl_mor[m]: f.on_mor(m) for m in e.morphisms}
    mor_map[cone_cat.identity[tip]] = i_cat.identity[apex]
    for o in e.objects:
        mor_map[("leg", o)] = legs[o]
    cone_f = FinFunctor(cone_cat, i_cat, obj_map, mor_map)
    # cone property, re-checked exhaustively
    for m in e.morphisms:
        if i_cat.comp(f.on_mor(m), legs[e.dom[m]]) != legs[e.cod[m]]:
            raise ConeExtensionError(3, ("cone property", m))
    return cone_f, apex, legs


def left_cone(e):
    """The category E^< = {tip} * E; returns (category, obj incl, mor incl, tip)."""
    tip = ("cone", "*")
    objects = [("o", o) for o in e.objects] + [tip]
    spec = []
    for m in e.morphisms:
        if m == e.identity[e.dom[m]]:
            continue
        spec.append((("m", m), ("o", e.dom[m]), ("o", e.cod[m])))
    for o in e.objects:
        spec.append((("leg", o), tip, ("o", o)))

    def comp(g, f):
        if f[0] == "leg":
            # g: ("m", m) from cod of leg
            tgt = e.cod[g[1]]
            return ("leg", tgt)
        gm, fm = g[1], f[1]
        c = e.comp(gm, fm)
        if c == e.identity[e.dom[c]]:
            return ("id", ("o", e.dom[c]))
        return ("m", c)

    cat = make_category(objects, spec, comp)
    incl_obj = {o: ("o", o) for o in e.objects}
    incl_mor = {}
    for m in e.morphisms:
        if m == e.identity[e.dom[m]]:
            incl_mor[m] = cat.identity[("o", e.dom[m])]
        else:
            incl_mor[m] = ("m", m)
    return cat, incl_obj, incl_mor, tip


def comma_over(f, d):
    """The comma category F_{/d}: objects (c, g: F(c) -> d)."""
    c_cat, d_cat = f.source, f.target
    if d not in d_cat.objects:
        raise CategoryError("comma target must be an object of the target")
    objects = [(c, g) for c in c_cat.objects
               for g in d_cat.hom(f.on_obj(c), d)]
    spec = []
    for (c1, g1) in objects:
        for (c2, g2) in objects:
            for m in c_cat.hom(c1, c2):
                if m == c_cat.identity[c1] and (c1, g1) == (c2, g2):
                    continue
                if d_cat.comp(g2, f.on_mor(m)) == g1:
                    spec.append((((c1, g1), (c2, g2), m), (c1, g1), (c2, g2)))

    def comp(gg, ff):
        m = c_cat.comp(gg[2], ff[2])
        src, tgt = ff[0], gg[1]
        if m == c_cat.identity[src[0]] and src == tgt:
            return ("id", src)
        return (src, tgt, m)

    return make_category(objects, spec, comp)


def comma_under(f, d):
    """The comma category F_{d/}: objects (c, g: d -> F(c))."""
    return comma_over(
        FinFunctor(opposite(f.source), opposite(f.target),
                   dict(f.obj_map), dict(f.mor_map)), d)


def is_connected(c):
    """Zig-zag connectivity of a finite category."""
    if not c.objects:
        return False
    seen = {c.objects[0]}
    frontier = [c.objects[0]]
    while frontier:
        o = frontier.pop()
        for m in c.morphisms:
            for nxt in (c.dom[m], c.cod[m]):
                if (c.dom[m] == o or c.cod[m] == o) and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    return len(seen) == len(c.objects)


@dataclass
class CoinitialReport:
    per_object: dict
    ok: bool
    certified: bool  # True when the domain is cofiltered (classical = real)
    label: str

    def __bool__(self):
        return self.ok


def check_coinitial_classical(f, connectivity_depth=None):
    """Nonempty+connected comma categories F_{/j} for each j.

    For a cofiltered domain this certifies coinitiality; otherwise the
    verdict is labeled "classical only".  ``connectivity_depth`` optionally
    caps the zig-zag search (None = full reachability)."""
    per = {}
    for j in f.target.objects:
        comma = comma_over(f, j)
        if not comma.objects:
            per[j] = (False, "empty comma category")
            continue
        if connectivity_depth is None:
            conn = is_connected(comma)
        else:
            conn = _connected_within(comma, connectivity_depth)
        per[j] = (conn, "connected" if conn else "disconnected comma category")
    ok = all(v[0] for v in per.values())
    certified = bool(check_cofiltered(f.source)) and ok
    label = "coinitial" if certified else "classical only"
    return CoinitialReport(per, ok, certified, label)


def _connected_within(c, depth):
    if not c.objects:
        return False
    seen = {c.objects[0]}
    frontier = [c.objects[0]]
    for _ in range(depth):
        new = []
        for o in frontier:
            for m in c.morphisms:
                if c.dom[m] == o and c.cod[m] not in seen:
                    seen.add(c.cod[m])
                    new.append(c.cod[m])
                if c.cod[m] == o and c.dom[m] not in seen:
                    seen.add(c.dom[m])
                    new.append(c.dom[m])
        if not new:
            break
        frontier = new
    return len(seen) == len(c.objects)


def nerve(c, dim_bound):
    """The nerve as a 2-coskeletal TauSSet; level k holds composable k-chains."""
    if dim_bound < 2:
        raise ValueError("dim_bound must be >= 2")
    levels = [list(c.objects)]
    chains = [(m,) for m in c.morphisms]
    levels.append(chains)
    for k in range(2, dim_bound + 1):
        nxt = []
        for ch in levels[-1]:
            for m in c.morphisms:
                if c.dom[m] == c.cod[ch[-1]]:
                    nxt.append(ch + (m,))
        levels.append(nxt)
    faces = {}
    degens = {}
    for k in range(1, dim_bound + 1):
        for i in range(k + 1):
            tbl = {}
            for ch in levels[k]:
                if k == 1:
                    tbl[ch] = c.cod[ch[0]] if i == 0 else c.dom[ch[0]]
                elif i == 0:
                    tbl[ch] = ch[1:]
                elif i == k:
                    tbl[ch] = ch[:-1]
                else:
                    tbl[ch] = ch[:i - 1] + (c.comp(ch[i], ch[i - 1]),) + ch[i + 1:]
            faces[(k, i)] = tbl
    for k in range(0, dim_bound):
        for i in range(k + 1):
            tbl = {}
            for ch in levels[k]:
                if k == 0:
                    tbl[ch] = (c.identity[ch],)
                else:
                    at = c.dom[ch[i]] if i < k else c.cod[ch[-1]]
                    tbl[ch] = ch[:i] + (c.identity[at],) + ch[i:]
            degens[(k, i)] = tbl
    return ssetmod.TauSSet(2, levels, faces, degens, check=True,
                           check_cosk=(dim_bound <= 4))


def nerve_map(functor, source_nerve, target_nerve):
    """The induced map of nerves."""
    def fn(k, x):
        if k == 0:
            return functor.on_obj(x)
        return tuple(functor.on_mor(m) for m in x)
    return ssetmod.SimplicialMap.from_function(
        source_nerve, target_nerve, fn,
        top=min(source_nerve.top, target_nerve.top), check=True)


def grothendieck_set(c, values, action):
    """Grothendieck construction of a Set-valued functor on c.

    ``values``: obj -> iterable; ``action``: (mor, element) -> element.
    Objects are pairs (c, x); morphisms are lifts of c-morphisms."""
    values = {o: list(v) for o, v in values.items()}
    for o in c.objects:
        for x in values[o]:
            if action[(c.identity[o], x)] != x:
                raise CategoryError("functor does not preserve identities")
    for g in c.morphisms:
        for f in c.morphisms:
            if c.cod[f] != c.dom[g]:
                continue
            for x in values[c.dom[f]]:
                if action[(c.comp(g, f), x)] != action[(g, action[(f, x)])]:
                    raise CategoryError(
                        f"functor not functorial at ({g!r}, {f!r})")
    objects = [(o, x) for o in c.objects for x in values[o]]
    spec = []
    for m in c.morphisms:
        for x in values[c.dom[m]]:
            if m == c.identity[c.dom[m]]:
                continue
            spec.append(((("lift", m, x)), (c.dom[m], x),
                         (c.cod[m], action[(m, x)])))

    def comp(g, f):
        m = c.comp(g[1], f[1])
        x = f[2]
        if m == c.identity[c.dom[m]]:
            return ("id", (c.dom[m], x))
        return ("lift", m, x)

    return make_category(objects, spec, comp)


def reedy_degree(poset):
    """Longest ascending chain length: deg(t) = 1 + max deg over {s : s < t}."""
    deg = {}

    def rec(t):
        if t in deg:
            return deg[t]
        below = poset.strictly_below(t)
        deg[t] = 0 if not below else 1 + max(rec(s) for s in below)
        return deg[t]

    for t in poset.elements:
        rec(t)
    return deg


# -- finite limits by enumeration ----------------------------------------------

def find_terminal(c):
    for t in c.objects:
        if all(len(c.hom(a, t)) == 1 for a in c.objects):
            return t
    return None


def _cone_factors_uniquely(c, apex, legs, cand_apex, cand_legs):
    """Count factorizations of (cand_apex, cand_legs) through (apex, legs)."""
    count = 0
    for u in c.hom(cand_apex, apex):
        if all(c.comp(leg, u) == cand_legs[i] for i, leg in enumerate(legs)):
            count += 1
    return count


def _limit_by_enumeration(c, cone_predicate):
    """Find a universal cone among all cones satisfying ``cone_predicate``.

    ``cone_predicate`` yields (apex, legs tuple) candidates."""
    cones = list(cone_predicate)
    for apex, legs in cones:
        if all(_cone_factors_uniquely(c, apex, legs, a2, l2) == 1
               for a2, l2 in cones):
            return apex, legs
    return None


def find_product(c, a, b):
    cones = [(x, (p, q)) for x in c.objects
             for p in c.hom(x, a) for q in c.hom(x, b)]
    return _limit_by_enumeration(c, cones)


def find_equalizer(c, f, g):
    if c.dom[f] != c.dom[g] or c.cod[f] != c.cod[g]:
        raise CategoryError("equalizer needs a parallel pair")
    cones = [(x, (e,)) for x in c.objects for e in c.hom(x, c.dom[f])
             if c.comp(f, e) == c.comp(g, e)]
    return _limit_by_enumeration(c, cones)


def find_pullback(c, f, g):
    """Pullback of the cospan  dom(f) --f--> . <--g-- dom(g)."""
    if c.cod[f] != c.cod[g]:
        raise CategoryError("pullback needs a cospan")
    cones = [(x, (p, q)) for x in c.objects
             for p in c.hom(x, c.dom[f]) for q in c.hom(x, c.dom[g])
             if c.comp(f, p) == c.comp(g, q)]
    return _limit_by_enumeration(c, cones)


def find_cat_isomorphism(c, d):
    """Brute-force isomorphism of finite categories (small inputs)."""
    if len(c.objects) != len(d.objects) or len(c.morphisms) != len(d.morphisms):
        return None
    for operm in itertools.permutations(d.objects):
        omap = dict(zip(c.objects, operm))
        hom_ok = all(
            len(c.hom(a, b)) == len(d.hom(omap[a], omap[b]))
            for a in c.objects for b in c.objects)
        if not hom_ok:
            continue
        mor_slots = [(m, d.hom(omap[c.dom[m]], omap[c.cod[m]]))
                     for m in c.morphisms]

        def extend(i, mmap, used):
            if i == len(mor_slots):
                for g in c.morphisms:
                    for f in c.morphisms:
                        if c.cod[f] != c.dom[g]:
                            continue
                        if mmap[c.comp(g, f)] != d.comp(mmap[g], mmap[f]):
                            return None
                return dict(mmap)
            m, cands = mor_slots[i]
            if m in mmap:
                return extend(i + 1, mmap, used)
            for cand in cands:
                if cand in used:
                    continue
                mmap[m] = cand
                used.add(cand)
                res = extend(i + 1, mmap, used)
                if res is not None:
                    return res
                del mmap[m]
                used.discard(cand)
            return None

        mmap0 = {c.identity[o]: d.identity[omap[o]] for o in c.objects}
        res = extend(0, mmap0, set(mmap0.values()))
        if res is not None:
            return FinFunctor(c, d, omap, res)
    return None
