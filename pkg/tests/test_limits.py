"""Cauchy chains with certified limits, the precompactness probe, and
uniform-bound reports."""

from fractions import Fraction

import numpy as np
import pytest

from obspers import library
from obspers.calculus import (lattice_grid, persistent_rank, restrict_extend,
                              restriction_pair, shift)
from obspers.decompose import iso_test
from obspers.errors import ValidationError
from obspers.fields import PrimeField
from obspers.limits import (CauchyChain, cauchy_limit, precompact_probe,
                            uniform_bounds_report, validate_chain)
from obspers.metric import Interleaving, verify
from obspers.stepmodule import Grid, identity_morphism, zero_module

from conftest import rational_grid_corpus
from oracles import oracle_tail_sums

F2 = PrimeField(2)
F5 = PrimeField(5)


def identity_link(v):
    i = identity_morphism(v)
    return verify(v, v, 0, i, i)


def density_chain(v, k_max):
    """Terms restrict v to 2^-k lattices over its bounding box; each coarse
    lattice is a sublattice of the next, so links come from the restriction
    pair between consecutive terms."""
    lo, hi = v.grid.min_corner(), v.grid.max_corner()
    grids = [lattice_grid(Fraction(1, 2 ** k), lo, hi) for k in range(k_max + 1)]
    terms = [restrict_extend(v, g) for g in grids]
    links = []
    for k in range(k_max):
        eps = Fraction(1, 2 ** k)
        pair = restriction_pair(terms[k + 1], grids[k], eps)
        link = verify(terms[k], terms[k + 1], eps, pair.g, pair.f)
        assert link.verified, link.violations
        links.append(link)
    return CauchyChain(tuple(terms), tuple(links))


# -- chains and limits -----------------------------------------------------------

def test_tails_are_exact_tail_sums():
    v = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    chain = density_chain(v, 3)
    assert list(chain.tails) == oracle_tail_sums(list(chain.epsilons))
    assert chain.tails[-1] == 0


def test_validate_chain_errors():
    v = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    assert validate_chain(CauchyChain((), ())) == ["chain has no terms"]
    bad_count = CauchyChain((v, v), ())
    assert "links" in validate_chain(bad_count)[0]
    ident = identity_morphism(v)
    fake = Interleaving(Fraction(-1), ident, ident, True)
    neg = CauchyChain((v, v), (fake,))
    assert any("negative" in msg for msg in validate_chain(neg))
    w = shift(v, 2)
    lying = Interleaving(Fraction(0), ident, ident, True)
    broken = CauchyChain((v, w), (lying,))
    assert any("does not verify" in msg for msg in validate_chain(broken))


def test_constant_chain_identity_certificates():
    v = library.m_lambda(5, 3)
    chain = CauchyChain((v, v, v), (identity_link(v), identity_link(v)))
    res = cauchy_limit(chain)
    assert res.limit == v
    assert len(res.certificates) == 3
    for cert in res.certificates:
        assert cert.verified and cert.eps == 0
        for g in cert.f.source.grid.points():
            n = cert.f.source.dims[g]
            assert np.array_equal(cert.f.comps[g], np.eye(n, dtype=np.int64))


def test_single_term_chain():
    v = library.single_cell_module(F2, (0, 0), 1, 2)
    res = cauchy_limit(CauchyChain((v,), ()))
    assert res.limit == v
    assert len(res.certificates) == 1 and res.certificates[0].verified


def test_density_chain_certificates_verify_at_tails():
    v = library.box_interval(
        F2, Grid(((Fraction(1, 3), Fraction(3, 2)), (0, Fraction(5, 4)))),
        (Fraction(1, 3), 0))
    chain = density_chain(v, 2)
    res = cauchy_limit(chain)
    tails = chain.tails
    for k, cert in enumerate(res.certificates):
        assert cert.verified, cert.violations
        assert cert.eps == tails[k]
        # re-verify independently: certificate k interleaves limit with term k
        again = verify(res.limit, chain.terms[k], tails[k], cert.f, cert.g)
        assert again.verified


def test_cauchy_limit_rejects_broken_chain():
    v = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    ident = identity_morphism(v)
    lying = Interleaving(Fraction(0), ident, ident, True)
    chain = CauchyChain((v, shift(v, 2)), (lying,))
    with pytest.raises(ValidationError):
        cauchy_limit(chain)


def test_zero_link_extension_keeps_limit_class():
    v = library.m_lambda(5, 2)
    chain = CauchyChain((v, v), (identity_link(v),))
    extended = CauchyChain((v, v, v), (identity_link(v), identity_link(v)))
    a = cauchy_limit(chain).limit
    b = cauchy_limit(extended).limit
    same, _ = iso_test(a, b)
    assert same


# -- precompactness probe --------------------------------------------------------

def test_probe_singleton():
    v = library.m_lambda(5, 1)
    res = precompact_probe([v], 1)
    assert res.exact and res.class_count == 1
    assert res.labels == (0,)
    assert len(res.representatives) == 1


def test_probe_small_shifts_of_constant_merge():
    # shifts inside one open lattice cell land on the same delta-grid pattern
    base = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    fam = [shift(base, Fraction(a, 8)) for a in (1, 3, 6)]
    res = precompact_probe(fam, 1)
    assert res.exact and res.class_count == 1


def test_probe_m_lambda_four_classes():
    fam = [library.m_lambda(5, lam) for lam in (1, 2, 3, 4)]
    res = precompact_probe(fam, 1)
    assert res.exact and res.class_count == 4
    assert sorted(res.labels) == [0, 1, 2, 3]
    assert len(res.representatives) == 4


def test_probe_permutation_invariant_count():
    fam = [library.m_lambda(5, lam) for lam in (1, 2, 3, 4)]
    fam += [shift(fam[0], Fraction(1, 8))]
    res = precompact_probe(fam, 1)
    back = precompact_probe(list(reversed(fam)), 1)
    assert res.class_count == back.class_count
    assert res.class_count <= len(fam)


def test_probe_rejects_bad_input():
    v = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    with pytest.raises(ValidationError):
        precompact_probe([], 1)
    with pytest.raises(ValidationError):
        precompact_probe([v], 0)
    w5 = library.m_lambda(5, 1)
    with pytest.raises(ValidationError):
        precompact_probe([v, w5], 1)


# -- uniform bounds --------------------------------------------------------------

def test_bounds_zero_family():
    fam = [zero_module(2, 2) for _ in range(3)]
    rep = uniform_bounds_report(fam, [0, 1])
    assert rep.box is None
    assert rep.max_ranks == {Fraction(0): 0, Fraction(1): 0}


def test_bounds_constant_on_box():
    v = library.constant_module(F2, Grid(((0, 1), (0, 1))))
    rep = uniform_bounds_report([v], [0, Fraction(1, 2), 1, 7])
    assert rep.box == ((0, 0), (1, 1))
    assert all(r == 1 for r in rep.max_ranks.values())


def test_bounds_match_per_member_recomputation():
    fam = rational_grid_corpus(seed=11, count=6)
    eps_list = [0, Fraction(1, 2), 1]
    rep = uniform_bounds_report(fam, eps_list)
    for eps in eps_list:
        expect = max(persistent_rank(v, eps) for v in fam)
        assert rep.max_ranks[Fraction(eps)] == expect
