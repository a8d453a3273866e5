from fractions import Fraction

import pytest

from qdposet import corpus
from qdposet.divisors import (
    Divisor,
    Polarization,
    PseudoDivisor,
    beta,
    canonical_polarization,
    divisor_bounds,
    elementary_specializations,
    equivalent_divisor,
    equivalent_pseudo_divisors,
    induced_polarizations,
    is_quasistable,
    is_quasistable_all_subsets,
    normalize_edges,
    pushforward,
    pushforward_polarization,
    specializes,
)
from qdposet.errors import CarrierMismatchError, PolarizationError, PreconditionError
from qdposet.graph import contract_edges
from qdposet.poset import enumerate_qd


def pd(edges, **values):
    return PseudoDivisor.make(edges, values)


# ----------------- types -----------------
def test_divisor_drops_zeros_and_adds():
    d = Divisor.of({"s": 1, "t": 0})
    assert d.support == {"s"}
    assert (d + Divisor.of({"t": 2})).as_dict() == {"s": 1, "t": 2}
    assert (d - d) == Divisor()
    assert d.plus("s", -1) == Divisor()


def test_polarization_needs_integer_degree():
    with pytest.raises(PolarizationError):
        Polarization.of({"u": Fraction(1, 2)})
    assert Polarization.of({"u": Fraction(1, 2), "v": Fraction(-3, 2)}).degree == -1


def test_pseudo_divisor_marks_exceptional_vertices():
    x = pd({"e1"}, s=-1)
    assert x.divisor["v@e1"] == 1
    assert x.rank == 1


def test_carrier_mismatch(twocyc):
    with pytest.raises(CarrierMismatchError):
        PseudoDivisor(frozenset({"e1"}), Divisor.of({"s": -1})).check(twocyc)
    with pytest.raises(CarrierMismatchError):
        pd((), q=1).check(twocyc)


# ----------------- polarizations and beta -----------------
def test_canonical_polarizations(triangle, loop, path2, theta):
    assert canonical_polarization(triangle).as_dict() == {}
    assert canonical_polarization(triangle).degree == 0
    assert canonical_polarization(loop)["u"] == 0
    assert canonical_polarization(path2).as_dict() == {"u": Fraction(-1, 2), "v": Fraction(-1, 2)}
    assert canonical_polarization(path2).degree == -1
    assert canonical_polarization(theta)["s"] == Fraction(1, 2)


def test_beta(twocyc, path2):
    mu = canonical_polarization(twocyc)
    assert beta(twocyc, Divisor.of({"s": -1, "t": 1}), mu, {"s"}) == 0
    mu = canonical_polarization(path2)
    D = Divisor.of({"u": -1})
    assert beta(path2, D, mu, {"u"}) == 0
    assert beta(path2, D, mu, {"v"}) == 1


def test_induced_polarizations(theta, twocyc, loop):
    _, down = induced_polarizations(theta, canonical_polarization(theta), {"e3"})
    assert down == canonical_polarization(twocyc)
    _, down = induced_polarizations(loop, canonical_polarization(loop), {"a"})
    assert down["u"] == -1


def test_pushforward_polarization(twocyc):
    spec = contract_edges(twocyc, {"e1"})
    mu = pushforward_polarization(spec, canonical_polarization(twocyc))
    assert mu.degree == 0
    assert mu == canonical_polarization(spec.target)


# ----------------- quasistability -----------------
def test_quasistable_examples(path2, twocyc, loop):
    assert is_quasistable(path2, "u", canonical_polarization(path2), pd((), u=-1))
    mu = canonical_polarization(twocyc)
    assert is_quasistable(twocyc, "s", mu, pd(()))
    assert not is_quasistable(twocyc, "s", mu, pd((), s=1, t=-1))
    assert is_quasistable(loop, "u", canonical_polarization(loop), pd({"a"}, u=-1))


def test_wrong_degree_is_not_quasistable(twocyc):
    assert not is_quasistable(twocyc, "s", canonical_polarization(twocyc), pd((), s=1))


@pytest.mark.parametrize("g", [corpus.dumb(), corpus.theta(), corpus.triangle_pendant(), corpus.loop_pendant()])
def test_hemisphere_test_matches_definition(g):
    p = enumerate_qd(g)
    mu = p.polarization
    for v0 in g.vertex_ids:
        for x in p.elements:
            shifted = PseudoDivisor(x.edges, x.divisor + Divisor.of({p.basepoint: 1}) - Divisor.of({v0: 1}))
            assert is_quasistable(g, v0, mu, shifted) == is_quasistable_all_subsets(g, v0, mu, shifted)
            assert is_quasistable(g, v0, mu, x) == is_quasistable_all_subsets(g, v0, mu, x)


def test_divisor_bounds(twocyc):
    mu = canonical_polarization(twocyc)
    assert divisor_bounds(twocyc, mu, ()) == {"s": (-1, 2), "t": (-1, 2)}
    assert divisor_bounds(twocyc, mu, {"e1"}) == {"s": (-1, 2), "t": (-1, 2)}


# ----------------- specializations -----------------
def test_elementary_specializations_of_twocyc(twocyc):
    steps = elementary_specializations(twocyc, pd({"e1"}, s=-1))
    assert [(s.edge, s.to) for s in steps] == [("e1", "s"), ("e1", "t")]
    assert [s.target for s in steps] == [pd(()), pd((), s=-1, t=1)]


def test_loop_has_one_specialization(loop):
    steps = elementary_specializations(loop, pd({"a"}, u=-1))
    assert len(steps) == 1
    assert steps[0].target == pd(())


def test_pushforward_along_contraction(twocyc):
    spec = contract_edges(twocyc, {"e1"})
    image = pushforward(spec, pd({"e2"}, s=-1))
    assert image == pd({"e2"}, s=-1)
    assert pushforward(spec, pd({"e1"}, s=-1)) == pd(())


def test_specializes(theta):
    top = enumerate_qd(theta).elements[-1]
    assert specializes(theta, top, top)
    assert any(specializes(theta, top, x) for x in enumerate_qd(theta).elements if x.rank == 0)
    assert not specializes(theta, pd(()), top)


# ----------------- equivalence -----------------
def test_special_pair_equivalence(dumb):
    assert normalize_edges(dumb, {"e2"}) == {"e1"}
    assert normalize_edges(dumb, {"e1", "e2"}) == {"e1", "e2"}
    a, b = pd({"e1", "p1"}, s=-1), pd({"e2", "p1"}, s=-1)
    assert equivalent_pseudo_divisors(dumb, a, b)
    assert equivalent_divisor(dumb, a, {"e2", "p1"}) == b
    with pytest.raises(PreconditionError):
        equivalent_divisor(dumb, a, {"e1", "e2"})
