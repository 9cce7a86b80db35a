"""Finite groups given by explicit multiplication tables."""

from __future__ import annotations

import itertools

from .intmat import FinAbGroup


class FinGroup:
    """A finite group: element list plus multiplication table."""

    def __init__(self, elements, table, check=True):
        self.elements = list(elements)
        self.table = dict(table)
        if check:
            self.validate()
        self.identity = self._find_identity()
        if self.identity is None:
            raise ValueError("no identity element")
        self._inverses = {a: self._find_inverse(a) for a in self.elements}
        if any(v is None for v in self._inverses.values()):
            raise ValueError("missing inverses")

    def validate(self):
        els = set(self.elements)
        if len(els) != len(self.elements):
            raise ValueError("duplicate elements")
        for a in self.elements:
            for b in self.elements:
                if (a, b) not in self.table:
                    raise ValueError(f"missing product {a!r}*{b!r}")
                if self.table[(a, b)] not in els:
                    raise ValueError("multiplication leaves the element set")
        for a, b, c in itertools.product(self.elements, repeat=3):
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                raise ValueError(f"associativity fails at {(a, b, c)!r}")

    def _find_identity(self):
        for e in self.elements:
            if all(self.mul(e, a) == a == self.mul(a, e) for a in self.elements):
                return e
        return None

    def _find_inverse(self, a):
        for b in self.elements:
            if self.mul(a, b) == self.identity and self.mul(b, a) == self.identity:
                return b
        return None

    def mul(self, a, b):
        return self.table[(a, b)]

    def inv(self, a):
        return self._inverses[a]

    def power(self, a, n):
        out = self.identity
        for _ in range(n):
            out = self.mul(out, a)
        return out

    def element_order(self, a):
        x, n = a, 1
        while x != self.identity:
            x = self.mul(x, a)
            n += 1
        return n

    @property
    def order(self):
        return len(self.elements)

    def is_abelian(self):
        return all(self.mul(a, b) == self.mul(b, a)
                   for a in self.elements for b in self.elements)

    def abelian_invariants(self):
        """Invariant-factor decomposition of an abelian group.

        Uses torsion counts: the number of cyclic p-factors with exponent
        >= j is log_p #{x : x^{p^j} = e} - log_p #{x : x^{p^(j-1)} = e}.
        """
        if not self.is_abelian():
            raise ValueError("group is not abelian")
        primary = []
        for p in _prime_divisors(self.order):
            logs = [0]
            j = 1
            while True:
                t = sum(1 for x in self.elements
                        if self.power(x, p ** j) == self.identity)
                aj = _exact_log(t, p)
                if aj == logs[-1]:
                    break
                logs.append(aj)
                j += 1
            mults = [logs[j] - logs[j - 1] for j in range(1, len(logs))]
            for i in range(mults[0] if mults else 0):
                lam = sum(1 for m in mults if m > i)
                primary.append(p ** lam)
        return FinAbGroup.from_cyclic_factors(primary)

    def is_isomorphic_to(self, other):
        """Brute-force isomorphism search (intended for small groups)."""
        if self.order != other.order:
            return False
        if sorted(self.element_order(a) for a in self.elements) != \
           sorted(other.element_order(a) for a in other.elements):
            return False
        if self.is_abelian() != other.is_abelian():
            return False
        if self.is_abelian():
            return self.abelian_invariants() == other.abelian_invariants()
        mine = [a for a in self.elements if a != self.identity]
        theirs = [a for a in other.elements if a != other.identity]

        def extend(mapping, remaining):
            if not remaining:
                return all(
                    mapping[self.mul(a, b)] == other.mul(mapping[a], mapping[b])
                    for a in self.elements for b in self.elements)
            a = remaining[0]
            for c in theirs:
                if other.element_order(c) != self.element_order(a):
                    continue
                if c in mapping.values():
                    continue
                m2 = dict(mapping)
                m2[a] = c
                if extend(m2, remaining[1:]):
                    return True
            return False

        return extend({self.identity: other.identity}, mine)


def cyclic_group(n):
    els = list(range(n))
    table = {(a, b): (a + b) % n for a in els for b in els}
    return FinGroup(els, table, check=False)


def direct_product(g, h):
    els = [(a, b) for a in g.elements for b in h.elements]
    table = {((a1, b1), (a2, b2)): (g.mul(a1, a2), h.mul(b1, b2))
             for (a1, b1) in els for (a2, b2) in els}
    return FinGroup(els, table, check=False)


def symmetric_group(n):
    els = list(itertools.permutations(range(n)))
    table = {(p, q): tuple(p[q[i]] for i in range(n)) for p in els for q in els}
    return FinGroup(els, table, check=False)


def group_hom_is_valid(g, h, mapping):
    return all(mapping[g.mul(a, b)] == h.mul(mapping[a], mapping[b])
               for a in g.elements for b in g.elements)


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _exact_log(t, p):
    e = 0
    while t > 1 and t % p == 0:
        t //= p
        e += 1
    if t != 1:
        raise ValueError("torsion count is not a prime power")
    return e
