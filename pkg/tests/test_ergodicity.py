import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergconv.ergodicity import (
    IMPLICATIONS,
    VERDICTS,
    ClassifyOptions,
    cesaro_gap_lower_bounds,
    classify,
    cross_check,
    fixed_point_analysis,
    matrix_dynamics,
    validate,
)
from ergconv.groups import cyclic, free, lattice, word
from ergconv.measure import Measure

Z = lattice(1)
Z3 = cyclic(3)
F2 = free(2)

FAST = ClassifyOptions(spectral=True, power_depth=10, radius_depth=8)

ALL_YES = {v: "yes" for v in VERDICTS}
ALL_NO = {v: "no" for v in VERDICTS}


def verdicts(mu, p):
    return classify(mu, p).verdicts


@pytest.mark.parametrize("mu,p,expected", [
    # unitary shift: mean ergodic on l2 but no spectral gap, powers do not converge
    (Measure(Z, {(1,): 1.0}), 2, {"power_bounded": "yes", "mean_ergodic": "yes", "uniformly_mean_ergodic": "no",
                                  "powers_converge": "no", "vague_ergodic": "yes"}),
    # the same shift on l1 keeps its mass moving away
    (Measure(Z, {(1,): 1.0}), 1, {"power_bounded": "yes", "mean_ergodic": "no", "uniformly_mean_ergodic": "no"}),
    (Measure(Z, {(0,): 0.5}), 2, ALL_YES),
    (Measure(Z, {(0,): 2.0}), 2, ALL_NO),
    # rotation of Z_3: finite, so uniformly mean ergodic, but the powers cycle
    (Measure(Z3, {1: 1.0}), 2, {"uniformly_mean_ergodic": "yes", "powers_converge": "no", "vague_ergodic": "yes"}),
    (Measure(Z3, {1: 1.0, 2: -1.0}), 2, {"power_bounded": "no", "cesaro_bounded": "no", "mean_ergodic": "no"}),
    (Measure(free(3), {word(i): 0.36 for i in (1, 2, 3)}), 2,
     {"uniformly_mean_ergodic": "yes", "powers_converge": "yes", "vague_ergodic": "no", "measure_cesaro_bounded": "no"}),
    (Measure(Z, {(1,): 0.5, (2,): -0.5}), 2, {"uniformly_mean_ergodic": "yes", "powers_converge": "no"}),
])
def test_known_verdicts(mu, p, expected):
    v = verdicts(mu, p)
    for name, value in expected.items():
        assert v[name] == value, name


def test_trace_is_complete_and_serialisable():
    rep = classify(Measure(Z, {(1,): 0.35, (0,): 0.35, (-1,): -0.35}), 1)
    assert not validate(rep)
    ume = rep.entries_for("uniformly_mean_ergodic")
    assert ume[0].rule == "radius-below-one"
    blob = json.loads(json.dumps(rep.to_json()))
    assert set(blob["verdicts"]) == set(VERDICTS)


def test_positive_l1_probability_on_infinite_group():
    # UME on l1 with infinite H needs |mu| < 1
    assert verdicts(Measure(F2, {word(1): 0.5, word(2): 0.5}), 1)["mean_ergodic"] == "no"
    assert verdicts(Measure(F2, {word(1): 0.4, word(2): 0.5}), 1)["uniformly_mean_ergodic"] == "yes"


coef = st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False)
z_atoms = st.dictionaries(st.integers(-2, 2).map(lambda k: (k,)), coef, min_size=1, max_size=3)
zn_atoms = st.dictionaries(st.integers(0, 5), coef, min_size=1, max_size=4)
f2_atoms = st.dictionaries(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=2).map(lambda xs: word(*xs)),
                           coef, min_size=1, max_size=3)
measures = st.one_of(z_atoms.map(lambda d: Measure(Z, d)), zn_atoms.map(lambda d: Measure(cyclic(6), d)),
                     f2_atoms.map(lambda d: Measure(F2, d)))


@given(measures, st.sampled_from([1.0, 2.0, 3.0, math.inf]))
def test_classifier_respects_implications(mu, p):
    rep = classify(mu, p, FAST)
    assert validate(rep) == []
    v = rep.verdicts
    for a, b, _ in IMPLICATIONS:
        assert not (v[a] == "yes" and v[b] == "no")
    if mu.norm < 1 - 1e-9:
        assert v["uniformly_mean_ergodic"] == "yes" and v["powers_converge"] == "yes"


@given(z_atoms.map(lambda d: Measure(Z, d)))
def test_cross_check_agrees_on_z(mu):
    rep = classify(mu, 2, FAST)
    assert [d for d in cross_check(mu, 2, rep) if d.kind == "discrepancy"] == []


def test_matrix_dynamics():
    jordan = np.array([[1, 1], [0, 1]], dtype=complex)
    assert matrix_dynamics(jordan).defective_at_one
    flip = np.diag([1.0, -1.0]).astype(complex)
    md = matrix_dynamics(flip)
    assert md.unimodular_not_one and not md.defective_at_one and md.rho == pytest.approx(1.0)
    md = matrix_dynamics(np.diag([0.5, 1.0]).astype(complex))
    assert md.all_unimodular_one and not md.unimodular_not_one


def test_fixed_points():
    rot = fixed_point_analysis(Measure(Z3, {1: 1.0}), 2)
    assert rot.kind == "nontrivial"
    w = np.array([rot.witness.entries.get(x, 0) for x in range(3)])
    assert np.allclose(w, w[0]) and rot.residual < 1e-12
    assert fixed_point_analysis(Measure(Z, {(1,): 0.5, (-1,): 0.5}), 2).kind == "zero_only"
    assert fixed_point_analysis(Measure(Z, {(1,): 0.5, (2,): -0.5}), 2).kind == "zero_only"


def test_cesaro_gap_lower_bounds():
    ns = [16, 64, 256]
    gap = cesaro_gap_lower_bounds(Measure(Z, {(1,): 0.5, (2,): -0.5}), ns)
    assert gap[0] > gap[1] > gap[2] and gap[2] < 0.05
    # the shift has spectrum on the whole circle, so the gaps never shrink
    shift = cesaro_gap_lower_bounds(Measure(Z, {(1,): 1.0}), ns)
    assert min(shift) > 0.3
