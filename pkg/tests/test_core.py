import random
from fractions import Fraction

import pytest

from exkit.core import (
    Alphabet,
    dirac,
    make_distribution,
    marginal,
    pointwise_dominates,
    tensor_power,
    uniform,
)
from exkit.errors import BadWordLength, DimensionMismatch, NotFactored, SumNotOne
from exkit.intervals import IntervalScalar

HALF = Fraction(1, 2)


def test_make_distribution_uniform_case():
    d = make_distribution(Alphabet(2), 1, {(0,): HALF, (1,): HALF})
    assert d((0,)) == HALF and d((1,)) == HALF


def test_make_distribution_sum_not_one():
    with pytest.raises(SumNotOne):
        make_distribution(Alphabet(2), 1, {(0,): Fraction(1, 3), (1,): Fraction(1, 3)})


def test_make_distribution_full_uniform_count():
    d = uniform(Alphabet(3), 8)
    assert len(d.entries) == 3**8 == 6561
    assert d((0,) * 8) == Fraction(1, 6561)


def test_bad_word_length_and_letters():
    with pytest.raises(BadWordLength):
        make_distribution(Alphabet(2), 2, {(0,): Fraction(1)})
    with pytest.raises(BadWordLength):
        make_distribution(Alphabet(2), 1, {(5,): Fraction(1)})


def test_tensor_power_uniform_and_dirac():
    u = make_distribution(Alphabet(2), 1, {(0,): HALF, (1,): HALF})
    sq = tensor_power(u, 2)
    assert all(sq(w) == Fraction(1, 4) for w in [(0, 0), (0, 1), (1, 0), (1, 1)])
    point = dirac(Alphabet(2), (0,))
    assert tensor_power(point, 5).entries == {(0,) * 5: Fraction(1)}


def test_tensor_power_paper_type_evaluation():
    d = make_distribution(
        Alphabet(3), 1, {(0,): Fraction(3, 8), (1,): Fraction(3, 8), (2,): Fraction(2, 8)}
    )
    p = tensor_power(d, 8)
    word = tuple(int(c) - 1 for c in "11323122")
    assert p(word) == Fraction(3**6 * 2**2, 8**8)


def test_marginal_of_per_letter_product_recovers_factor():
    joint = Alphabet(4, (2, 2))
    letter = make_distribution(
        joint,
        1,
        {
            (joint.pack((a, x)),): Fraction(1, 2) * (Fraction(1, 3) if x == 0 else Fraction(2, 3))
            for a in (0, 1)
            for x in (0, 1)
        },
    )
    p = tensor_power(letter, 3)
    m = marginal(p, 1)
    expect = tensor_power(
        make_distribution(Alphabet(2), 1, {(0,): Fraction(1, 3), (1,): Fraction(2, 3)}), 3
    )
    assert m.entries == expect.entries


def test_marginal_dirac_projection():
    joint = Alphabet(4, (2, 2))
    word = tuple(joint.pack(p) for p in ((0, 0), (1, 0), (1, 1)))
    m = marginal(dirac(joint, word), 1)
    assert m.entries == {(0, 0, 1): Fraction(1)}


def test_marginal_uniform_stays_uniform():
    joint = Alphabet(4, (2, 2))
    m = marginal(uniform(joint, 2), 1)
    assert all(v == Fraction(1, 4) for v in m.entries.values())


def test_marginal_requires_factored():
    with pytest.raises(NotFactored):
        marginal(uniform(Alphabet(2), 2), 0)


def test_pointwise_dominates_examples():
    u = make_distribution(Alphabet(2), 1, {(0,): HALF, (1,): HALF})
    point = dirac(Alphabet(2), (0,))
    assert pointwise_dominates(IntervalScalar.exact(1), u, u).holds
    v = pointwise_dominates(IntervalScalar.exact(1), u, point)
    assert v.fails and v.witness == (0,) and v.margin == HALF
    assert pointwise_dominates(IntervalScalar.exact(2), u, point).holds


def test_pointwise_dominates_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pointwise_dominates(
            IntervalScalar.exact(1), uniform(Alphabet(2), 1), uniform(Alphabet(2), 2)
        )


def test_pointwise_verdicts_refine_monotonically():
    # An interval constant can be inconclusive, never both holds and fails;
    # tightening the interval only resolves, never flips.
    rng = random.Random(11)
    u = uniform(Alphabet(2), 2)
    for _ in range(50):
        c = Fraction(rng.randint(1, 8), 4)
        wide = IntervalScalar(c - Fraction(1, 2), c + Fraction(1, 2))
        narrow = IntervalScalar(c, c)
        p = uniform(Alphabet(2), 2) if rng.random() < 0.5 else dirac(Alphabet(2), (0, 0))
        v_wide = pointwise_dominates(wide, u, p)
        v_narrow = pointwise_dominates(narrow, u, p)
        if v_wide.holds:
            assert v_narrow.holds
        if v_wide.fails:
            assert v_narrow.fails


def test_alphabet_pack_unpack_round_trip():
    a = Alphabet(24, (2, 3, 4))
    for letter in range(24):
        assert a.pack(a.unpack(letter)) == letter
    with pytest.raises(ValueError):
        Alphabet(5, (2, 2))


def test_zero_length_words_rejected():
    with pytest.raises(BadWordLength):
        make_distribution(Alphabet(2), 0, {(): Fraction(1)})
