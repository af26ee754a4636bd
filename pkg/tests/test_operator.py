import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergconv.errors import StructuralError
from ergconv.groups import abelian, cyclic, dihedral, free, lattice, word
from ergconv.measure import Measure
from ergconv.operator import (
    ConvOperator,
    SupportedVector,
    apply,
    exact_matrix,
    iterate_cesaro,
    operator_norm,
    structural_upper_bounds,
    window_matrix,
)

D4 = dihedral(4)
Z = lattice(1)
coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)
d4_measures = st.dictionaries(st.integers(0, 7), coef, min_size=1, max_size=8).map(lambda d: Measure(D4, d))
d4_vectors = st.dictionaries(st.integers(0, 7), coef, max_size=8).map(lambda d: SupportedVector(D4, d))


@given(d4_measures, d4_vectors, st.sampled_from(["left", "right"]))
def test_apply_matches_matrix(mu, f, side):
    T = ConvOperator(mu, 2, side)
    M = exact_matrix(T)
    v = np.array([f.entries.get(i, 0) for i in range(8)])
    out = apply(T, f)
    got = np.array([out.entries.get(i, 0) for i in range(8)])
    assert np.allclose(M @ v, got, atol=1e-12)


@given(d4_measures, d4_measures)
def test_left_operators_compose_like_convolution(mu, nu):
    A = exact_matrix(ConvOperator(mu, 2))
    B = exact_matrix(ConvOperator(nu, 2))
    C = exact_matrix(ConvOperator(mu * nu, 2))
    assert np.allclose(A @ B, C, atol=1e-10)
    # left and right convolutions commute
    R = exact_matrix(ConvOperator(nu, 2, "right"))
    assert np.allclose(A @ R, R @ A, atol=1e-10)


@given(d4_measures)
def test_norm_interval_ordering(mu):
    n1 = operator_norm(ConvOperator(mu, 1), "exact_matrix")
    n2 = operator_norm(ConvOperator(mu, 2), "exact_matrix")
    n3 = operator_norm(ConvOperator(mu, 3), "exact_matrix")
    assert math.isclose(n1.lo, mu.norm, rel_tol=1e-12)
    # |mu^| <= |lambda_p| <= |mu|, and the lower bound never exceeds the upper one
    for n in (n2, n3):
        assert n.lo <= n.hi + 1e-12 <= mu.norm + 2e-12
    assert n2.lo >= abs(mu.mass()) - 1e-9


def test_z3_norms():
    mu = Measure(cyclic(3), {1: 1.0, 2: -1.0})
    assert abs(operator_norm(ConvOperator(mu, 2), "exact_matrix").lo - math.sqrt(3)) < 1e-12
    n4 = operator_norm(ConvOperator(mu, 4), "exact_matrix")
    assert n4.lo >= (1 / 3) ** 0.25 * (1 + 4 ** 0.25) - 1e-9
    assert n4.hi == 2.0


def test_power2_agrees_with_svd():
    mu = Measure(abelian(2, 3), {1: 0.3, 4: -0.7j, 5: 0.2})
    a = operator_norm(ConvOperator(mu, 2), "power2")
    b = operator_norm(ConvOperator(mu, 2), "exact_matrix")
    assert abs(a.lo - b.lo) < 1e-8 and a.hi == pytest.approx(b.hi)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_boyd_lower_on_lattice_stays_below_total_variation(p):
    mu = Measure(Z, {(1,): 0.5, (2,): -0.5})
    n = operator_norm(ConvOperator(mu, p), "boyd_p", window=20)
    assert 0.5 < n.lo <= n.hi == 1.0


def test_free_basis_and_symmetric_formulas():
    F3 = free(3)
    gens = Measure(F3, {word(i): 1.0 for i in (1, 2, 3)})
    vals = {name: v for v, name, _, _ in structural_upper_bounds(gens)}
    assert vals["free-basis"] == pytest.approx(2 * math.sqrt(2))
    sym = Measure(free(2), {word(s): 0.25 for s in (1, -1, 2, -2)})
    vals = {name: v for v, name, _, _ in structural_upper_bounds(sym)}
    assert vals["symmetric-generators"] == pytest.approx(0.25 * 2 * math.sqrt(3))
    # a repeated generator is not a free basis
    bad = Measure(F3, {word(1): 1.0, word(-1): 1.0})
    assert "free-basis" not in {name for _, name, _, _ in structural_upper_bounds(bad)}


def test_window_lower_bounds_increase_towards_kesten_value():
    sym = Measure(free(2), {word(s): 0.25 for s in (1, -1, 2, -2)})
    exact = math.sqrt(3) / 2
    lows = [operator_norm(ConvOperator(sym, 2), "window_lower", window=r).lo for r in (1, 3, 5)]
    assert lows == sorted(lows)
    assert all(v <= exact + 1e-9 for v in lows)
    assert lows[-1] > 0.8 * exact


def test_window_matrix_rows_cover_image():
    mu = Measure(free(2), {word(1): 1.0, word(-2): 2.0})
    A, cols = window_matrix(ConvOperator(mu, 2), 2)
    assert A.shape[1] == len(cols) == 17
    # every column holds the two atoms exactly once
    assert np.allclose(np.asarray(abs(A).sum(axis=0)).ravel(), 3.0)


def test_iterate_periodic_walk_converges_to_haar():
    g = cyclic(5)
    mu = Measure(g, {1: 1.0})
    it = iterate_cesaro(ConvOperator(mu, 1), [SupportedVector.delta(g)], 2048)
    assert it.sot_converges == "yes"
    lim = it.traces[0].limit
    dist = max(abs(lim.entries.get(x, 0) - 0.2) for x in range(5))
    assert dist <= it.traces[0].tail_bound


def test_iterate_contraction_fixed_point_zero():
    mu = Measure(Z, {(0,): 0.25, (1,): 0.25})
    it = iterate_cesaro(ConvOperator(mu, 2), [SupportedVector.delta(Z)], 256)
    assert it.sot_converges == "yes" and it.fixed_point_is_zero == "yes"


def test_iterate_expanding_operator_stops_early():
    mu = Measure(Z, {(0,): 1.5, (1,): 0.5})
    it = iterate_cesaro(ConvOperator(mu, 2), [SupportedVector.delta(Z)], 4096)
    tr = it.traces[0]
    assert it.sot_converges == "no"
    assert all(np.isfinite(tr.gap))
    rows = it.csv_rows()
    assert rows and rows[0][:2] == (0, 1)


def test_iterate_rejects_linf():
    with pytest.raises(StructuralError):
        iterate_cesaro(ConvOperator(Measure.delta(Z), math.inf), [SupportedVector.delta(Z)])


def test_bad_operator_arguments():
    with pytest.raises(ValueError):
        ConvOperator(Measure.delta(Z), 0.5)
    with pytest.raises(ValueError):
        ConvOperator(Measure.delta(Z), 2, "middle")
    with pytest.raises(StructuralError):
        operator_norm(ConvOperator(Measure.delta(Z), 2), "nonsense")
