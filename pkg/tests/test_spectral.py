import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergconv.errors import StructuralError
from ergconv.groups import abelian, cyclic, dihedral, free, lattice, word
from ergconv.measure import Measure
from ergconv.operator import ConvOperator, exact_matrix
from ergconv.spectral import (
    DualSampler,
    character_table,
    contains_one,
    gap_at_one,
    orbit_accumulation,
    radius_estimate,
    spectrum2,
    square_spectrum_relation,
    transform_at,
    transform_grid,
)

Z = lattice(1)
Z2 = lattice(2)
coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def z_measures(max_size=4):
    return st.dictionaries(st.integers(-3, 3).map(lambda k: (k,)), coef, min_size=1, max_size=max_size).map(
        lambda d: Measure(Z, d))


@given(st.integers(2, 16), st.data())
def test_cyclic_transform_matches_fft(n, data):
    g = cyclic(n)
    c = data.draw(st.lists(coef, min_size=n, max_size=n))
    mu = Measure(g, dict(enumerate(c)))
    vals = np.sort_complex(np.round(transform_grid(mu, DualSampler.for_group(g)), 10))
    # characters x -> exp(2 pi i k x / n): the transform is n * ifft of the coefficients
    oracle = np.sort_complex(np.round(np.fft.ifft(np.array(c)) * n, 10))
    assert np.allclose(vals, oracle, atol=1e-9)


def test_character_table_counts():
    assert len(character_table(abelian(2, 2, 3))) == 12
    chars = character_table(abelian(4, 6))
    vals = np.array([ch.values() for ch in chars])
    # distinct characters are orthogonal
    gram = vals @ vals.conj().T / 24
    assert np.allclose(gram, np.eye(24), atol=1e-10)


@given(z_measures())
def test_norm2_brackets_dense_sup(mu):
    rep = spectrum2(mu)
    t = np.linspace(0, 2 * np.pi, 20001)[:, None]
    dense = float(np.abs(transform_at(mu, t)).max())
    # the dense grid undershoots the true sup by at most L h / 2
    slack = sum(abs(c) * abs(k) for (k,), c in mu.atoms.items()) * np.pi / 20000
    assert rep.norm2.lo - slack - 1e-12 <= dense <= rep.norm2.hi + 1e-9
    # the certificate never loosens beyond the unrefined grid cell
    h = 2 * np.pi / DualSampler.for_group(Z).resolution
    assert rep.norm2.hi - rep.norm2.lo <= rep.lipschitz * h / 2 + 1e-12
    assert rep.norm2.hi <= mu.norm + 1e-12


def test_finite_nonabelian_uses_matrix():
    g = dihedral(3)
    mu = Measure(g, {1: 0.5, 3: 0.5})
    rep = spectrum2(mu)
    s = np.linalg.svd(exact_matrix(ConvOperator(mu, 2)), compute_uv=False)[0]
    assert rep.norm2.lo == pytest.approx(s)


@pytest.mark.parametrize("atoms,kind", [
    ({(1,): 0.5, (2,): -0.5}, "gap"),
    ({(1,): 1.0}, "accumulation"),
    ({(0,): 0.5, (1,): 0.5}, "accumulation"),
    ({(0,): 0.3}, "gap"),
])
def test_gap_at_one_on_z(atoms, kind):
    assert gap_at_one(Measure(Z, atoms)).kind == kind


def test_gap_on_z2_and_finite():
    assert gap_at_one(Measure(Z2, {(1, 0): 0.5, (0, 1): 0.5})).kind == "accumulation"
    assert gap_at_one(Measure(cyclic(3), {1: 1.0})).kind == "gap"


def test_orbit_accumulation():
    assert orbit_accumulation((math.sqrt(5) - 1) / 2).kind == "accumulation"
    # a periodic orbit never returns near 1 without hitting it
    assert orbit_accumulation(0.25).kind != "accumulation"


def test_contains_one():
    mu = Measure(Z, {(1,): 0.5, (2,): -0.5})
    assert not contains_one(mu)
    assert contains_one(mu * mu)  # mu^(pi) = -1


@given(z_measures(3))
def test_square_relation_multiplicative(mu):
    assert square_spectrum_relation(mu).ok


def test_square_symmetry_counterexample():
    # +1 accumulates while -1 is a single point of the spectrum
    rel = square_spectrum_relation(Measure(Z, {(0,): 0.5, (1,): 0.5}))
    assert rel.plus_one == "accumulation" and rel.symmetric is False


def test_radius_on_abelian_groups_equals_sup():
    mu = Measure(Z, {(1,): 1 / 3, (0,): 1 / 3, (-1,): -1 / 3})
    for p in (1, 2, math.inf):
        r = radius_estimate(mu, p)
        assert r.lo == pytest.approx(math.sqrt(5) / 3, abs=1e-9)
        assert r.lo <= r.hi <= math.sqrt(5) / 3 + 1e-6


def test_radius_positive_amenable_equals_mass():
    for mu in (Measure(Z2, {(1, 0): 0.2, (0, -1): 0.3}), Measure(cyclic(7), {2: 0.4, 3: 0.1})):
        r = radius_estimate(mu, 2)
        assert r.lo == pytest.approx(mu.norm, abs=1e-9) and r.hi == pytest.approx(mu.norm, abs=1e-9)


def test_radius_free_generators():
    F3 = free(3)
    gens = Measure(F3, {word(i): 1.0 for i in (1, 2, 3)})
    r = radius_estimate(gens, 2, 20)
    # positive words of one length: the radius is the l2 norm of the coefficients
    assert r.hi == pytest.approx(math.sqrt(3), abs=1e-9)
    assert r.lo <= r.hi < 3
    assert radius_estimate(gens, 1).lo == pytest.approx(3.0)


def test_free_spectrum_refused():
    with pytest.raises(StructuralError):
        spectrum2(Measure(free(2), {word(1): 1.0}))
