import pytest

from procat.abelian import AbHom, hom_elements, invert, quotient_hom
from procat.intmat import FinAbGroup


Z = FinAbGroup((), 1)


def test_hom_counts():
    # |Hom(Z/n, Z/m)| = gcd(n, m)
    for n, m, g in [(4, 2, 2), (2, 4, 2), (6, 4, 2), (5, 7, 1), (12, 18, 6)]:
        assert len(hom_elements(FinAbGroup.cyclic(n), FinAbGroup.cyclic(m))) == g
    # Hom(Z/n, Z) = 0
    homs = hom_elements(FinAbGroup.cyclic(6), Z)
    assert len(homs) == 1 and homs[0] == AbHom.zero(FinAbGroup.cyclic(6), Z)
    # Hom(Z, Z/m) = Z/m
    assert len(hom_elements(Z, FinAbGroup.cyclic(5))) == 5
    with pytest.raises(ValueError):
        hom_elements(Z, Z)


def test_quotient_and_composition():
    q42 = quotient_hom(4, 2)
    q84 = quotient_hom(8, 4)
    q82 = quotient_hom(8, 2)
    assert q42.compose(q84) == q82
    assert q42.apply((3,)) == (1,)


def test_invert():
    g = FinAbGroup.cyclic(5)
    double = AbHom.make(g, g, [[2]])
    inv = invert(double)
    assert inv is not None
    assert inv.compose(double) == AbHom.identity(g)
    # 2: Z/4 -> Z/4 is not invertible
    h = AbHom.make(FinAbGroup.cyclic(4), FinAbGroup.cyclic(4), [[2]])
    assert invert(h) is None


def test_well_definedness_guard():
    with pytest.raises(ValueError):
        AbHom(FinAbGroup.cyclic(2), FinAbGroup.cyclic(4), ((1,),))
    # but 2: Z/2 -> Z/4 is fine
    AbHom(FinAbGroup.cyclic(2), FinAbGroup.cyclic(4), ((2,),))


def test_free_to_torsion():
    h = AbHom.make(Z, FinAbGroup.cyclic(3), [[1]])
    assert h.apply((4,)) == (1,)
    homs = hom_elements(FinAbGroup((2,), 0), FinAbGroup((4,), 1))
    # Hom(Z/2, Z/4 + Z) = Z/2
    assert len(homs) == 2
