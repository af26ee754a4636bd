import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ergconv.errors import StructuralError
from ergconv.groups import (
    abelian,
    ball,
    cyclic,
    dihedral,
    finite_cayley,
    free,
    from_spec,
    generated_subgroup,
    lattice,
    parse_word,
    reduce_word,
    signed_letters,
    word,
)

F3 = free(3)
Z2 = lattice(2)
D5 = dihedral(5)


def signed(k=3, max_size=8):
    return st.lists(st.integers(1, k).flatmap(lambda i: st.sampled_from([i, -i])), max_size=max_size)


free_words = signed().map(lambda xs: word(*xs))
lattice_pts = st.tuples(st.integers(-20, 20), st.integers(-20, 20))
d5_elems = st.integers(0, 9)


@pytest.mark.parametrize("g,elems", [(F3, free_words), (Z2, lattice_pts), (D5, d5_elems)])
@given(data=st.data())
def test_group_axioms(g, elems, data):
    a, b, c = data.draw(elems), data.draw(elems), data.draw(elems)
    assert g.mul(g.mul(a, b), c) == g.mul(a, g.mul(b, c))
    assert g.mul(a, g.identity) == a == g.mul(g.identity, a)
    assert g.mul(a, g.inverse(a)) == g.identity
    assert g.inverse(g.mul(a, b)) == g.mul(g.inverse(b), g.inverse(a))


@given(free_words)
def test_free_words_stay_reduced_and_roundtrip(a):
    F3.check(a)
    assert F3.parse(F3.to_json(a)) == a
    assert word(*signed_letters(a)) == a
    assert F3.length(a) == len(a)


@given(signed(max_size=12))
def test_reduce_word_cancels_pairs(xs):
    a = word(*xs)
    # reduction is confluent: reducing twice changes nothing
    assert reduce_word(a) == a
    assert all(a[i] != a[i - 1] ^ 1 for i in range(1, len(a)))


def test_word_and_parse_oracles():
    assert word(1, -2) == parse_word("x1 x2^-1")
    assert word(1, -1) == () == parse_word("e")
    assert parse_word("x1^3 x1^-2") == word(1)
    assert F3.format(word(2, -3)) == "x2 x3^-1"
    with pytest.raises(StructuralError):
        parse_word("y1")
    with pytest.raises(StructuralError):
        F3.check(word(4))  # x4 does not exist in F_3
    with pytest.raises(StructuralError):
        word(0)


def test_free_sort_key_is_shortlex():
    elems = [word(2), (), word(-1), word(1, 1), word(1)]
    assert F3.sorted(elems) == [(), word(1), word(-1), word(2), word(1, 1)]


@pytest.mark.parametrize("k,radius", [(2, 3), (3, 4), (3, 6)])
def test_free_ball_size(k, radius):
    # 1 + 2k ((2k-1)^R - 1) / (2k-2)
    expected = 1 + 2 * k * ((2 * k - 1) ** radius - 1) // (2 * k - 2)
    assert len(ball(free(k), radius)) == expected


@pytest.mark.parametrize("radius", [0, 1, 4, 7])
def test_lattice_ball_size(radius):
    assert len(ball(Z2, radius)) == 2 * radius * radius + 2 * radius + 1
    assert len(ball(lattice(1), radius)) == 2 * radius + 1


def test_finite_models():
    z12 = cyclic(12)
    assert z12.order == 12 and z12.is_abelian
    assert not D5.is_abelian and D5.order == 10
    assert abelian(2, 4).is_abelian and abelian(2, 4).order == 8
    assert generated_subgroup(z12, [4]).finite_elements == (0, 4, 8)
    assert generated_subgroup(z12, [4, 6]).finite_elements == tuple(range(0, 12, 2))
    assert generated_subgroup(D5, [1]).finite_elements == tuple(range(5))


def test_bad_tables_rejected():
    with pytest.raises(StructuralError):
        finite_cayley([[0, 1], [0, 1]])
    with pytest.raises(StructuralError):
        # Latin square without associativity
        finite_cayley([[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3], [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]])
    with pytest.raises(StructuralError):
        cyclic(0)


def test_generated_subgroup_amenability():
    assert generated_subgroup(F3, [word(1), word(2)]).amenable == "no"
    # commuting words generate a cyclic subgroup
    info = generated_subgroup(F3, [word(1, 2), word(1, 2, 1, 2)])
    assert info.amenable == "yes" and not info.is_finite
    assert generated_subgroup(F3, []).is_trivial
    assert generated_subgroup(Z2, [(1, 0), (0, 3)]).amenable == "yes"


@pytest.mark.parametrize("spec,order", [
    ({"type": "cyclic", "n": 7}, 7),
    ({"type": "abelian", "orders": [2, 3]}, 6),
    ({"type": "dihedral", "n": 4}, 8),
    ({"type": "lattice", "d": 2}, None),
    ({"type": "free", "k": 2}, None),
])
def test_from_spec(spec, order):
    g = from_spec(spec)
    assert g.order == order
    if not g.is_finite:
        assert from_spec(g.to_json_spec()) == g


@pytest.mark.parametrize("spec", [{}, {"type": "torus"}, {"type": "cyclic"}, {"type": "free", "k": 0}])
def test_from_spec_errors(spec):
    with pytest.raises(StructuralError):
        from_spec(spec)


def test_ball_respects_budget():
    from ergconv import limits
    from ergconv.errors import ResourceError

    with limits.atom_limit(1000), pytest.raises(ResourceError):
        ball(free(3), 8)
    assert math.isclose(len(ball(free(2), 2)), 17)
