import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergconv import limits
from ergconv.errors import ResourceError, StructuralError
from ergconv.groups import cyclic, dihedral, free, lattice, word
from ergconv.measure import Measure, cesaro, involution, power, vague_probe

Z = lattice(1)
F2 = free(2)
D4 = dihedral(4)

coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def z_measures(lo=-4, hi=4, max_size=5):
    return st.dictionaries(st.integers(lo, hi).map(lambda k: (k,)), coef, max_size=max_size).map(lambda d: Measure(Z, d))


def f2_measures(max_size=4):
    words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=3).map(lambda xs: word(*xs))
    return st.dictionaries(words, coef, max_size=max_size).map(lambda d: Measure(F2, d))


d4_measures = st.dictionaries(st.integers(0, 7), coef, max_size=8).map(lambda d: Measure(D4, d))


def as_poly(mu, lo=-40):
    out = np.zeros(81, dtype=complex)
    for (k,), c in mu.atoms.items():
        out[k - lo] = c
    return out


@given(z_measures(), z_measures())
def test_convolution_on_z_is_polynomial_product(mu, nu):
    # oracle: numpy polynomial multiplication of the coefficient arrays
    a, b = as_poly(mu, -4)[:9], as_poly(nu, -4)[:9]
    expected = np.convolve(a, b)  # exponents start at -8
    got = np.array([(mu * nu)[(k,)] for k in range(-8, 9)])
    assert np.allclose(got, expected, atol=1e-12)


@given(d4_measures, d4_measures)
def test_convolution_on_finite_group_matches_table(mu, nu):
    expected = np.zeros(8, dtype=complex)
    for x, a in mu.atoms.items():
        for y, b in nu.atoms.items():
            expected[D4.table[x][y]] += a * b
    got = np.array([(mu * nu)[s] for s in range(8)])
    assert np.allclose(got, expected, atol=1e-12)


@given(f2_measures(), f2_measures(), f2_measures())
def test_algebra_laws(mu, nu, rho):
    assert ((mu * nu) * rho).distance(mu * (nu * rho)) <= 1e-9
    assert (mu * nu).norm <= mu.norm * nu.norm + 1e-9
    assert abs((mu * nu).mass() - mu.mass() * nu.mass()) <= 1e-9
    # involution is an anti-multiplicative isometry
    assert involution(mu * nu).distance(involution(nu) * involution(mu)) <= 1e-9
    assert math.isclose(involution(mu).norm, mu.norm, rel_tol=1e-12, abs_tol=1e-15)
    assert involution(involution(mu)) == mu


@given(z_measures(max_size=3), st.integers(1, 6))
def test_power_and_cesaro(mu, n):
    p = Measure.delta(Z)
    seq = []
    for _ in range(n):
        p = p * mu
        seq.append(p)
    assert power(mu, n).distance(seq[-1]) <= 1e-9 * max(1.0, seq[-1].norm)
    total = seq[0]
    for m in seq[1:]:
        total = total + m
    assert cesaro(mu, n).distance(total / n) <= 1e-9 * max(1.0, total.norm)


def test_involution_on_free_group():
    mu = Measure(F2, {word(1, 2): 2 + 1j, (): 0.5})
    inv = involution(mu)
    assert inv[word(-2, -1)] == 2 - 1j and inv[()] == 0.5


def test_normality():
    assert Measure(F2, {word(1): 1, word(2): 1}).is_operator_normal() is False
    assert Measure(F2, {word(1): 1, word(-1): 1}).is_operator_normal()
    assert Measure(D4, {1: 1, 3: 1}).is_operator_normal()
    herm = Measure(Z, {(1,): 0.5, (-1,): 0.5})
    assert herm.is_hermitian() and herm.is_probability()


def test_relative_dedup_keeps_small_powers():
    # absolute thresholds would erase this power entirely
    mu = Measure(Z, {(1,): 0.35, (0,): 0.35, (-1,): -0.35})
    p = power(mu, 200)
    assert 0 < p.norm < 1e-20


def test_json_roundtrip_and_digest():
    mu = Measure(F2, {word(1, -2): 0.25 + 0.5j, (): -1})
    back = Measure.from_json(F2, mu.to_json())
    assert back == mu and back.digest() == mu.digest()
    assert mu.digest() != (mu * 2).digest()
    with pytest.raises(StructuralError):
        Measure.from_json(F2, [{"re": 1}])


def test_group_mismatch():
    with pytest.raises(StructuralError):
        Measure.delta(Z) * Measure.delta(F2)


def test_convolution_budget():
    mu = Measure(free(3), {word(i): 1 / 3 for i in (1, 2, 3)})
    with limits.atom_limit(100), pytest.raises(ResourceError):
        power(mu, 6)


def test_vague_probe_compact_support():
    tr = vague_probe(Measure(cyclic(3), {1: 1.0}), 4096)
    assert tr.power_bounded == "yes" and tr.cesaro_bounded == "yes"
    lim = tr.vague_limit
    assert max(abs(lim[x] - 1 / 3) for x in range(3)) < 1e-3


def test_vague_probe_walk_on_z_tends_to_zero():
    tr = vague_probe(Measure(Z, {(0,): 0.5, (1,): 0.5}), 1024)
    assert tr.vague_limit is not None and len(tr.vague_limit.atoms) == 0


def test_vague_probe_blowup_free_group():
    nu = Measure(free(3), {word(i): 0.36 for i in (1, 2, 3)})
    with limits.atom_limit(100_000):
        tr = vague_probe(nu, 64)
    assert tr.cesaro_bounded == "no" and tr.vague_limit is None


def test_vague_probe_rejects_short_horizon():
    with pytest.raises(ValueError):
        vague_probe(Measure.delta(Z), 1)
