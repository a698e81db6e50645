"""Extreme class distributions, analytic pre-factors and reduction certificates.

The flexible reduction bounds any relation-invariant P pointwise:

    P <= N * alpha(n)^2 * sum_k (1/N) F(P, pi_k)^2 pi_k

where the pi_k are the empirical i.i.d. / Markov / l-Markov comparison
distributions of the nonempty classes and alpha(n) dominates every per-class
ratio max Q_k/pi_k.  Both sides are constant on classes, so the certificate
checks one representative per class: an N-sized check instead of d^n.

P and pi values are exact rationals; fidelities and alpha(n) are carried as
outward-rounded intervals, so each per-class verdict is certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    Alphabet,
    DEFAULT_ENUM_CAP,
    FiniteDistribution,
    Word,
    ZERO,
    ONE,
)
from .errors import BadParams, EmptyClass, NotExchangeable
from .intervals import DEFAULT_BITS, MAX_BITS, IntervalScalar, escalate_bits, sqrt_bounds
from .relations import (
    ClassIndex,
    Exchangeable,
    ExchangeableType,
    LMarkov,
    LMarkovType,
    Markov,
    MarkovType,
    ProductRelation,
    ProductType,
    Relation,
    TypeDescriptor,
    class_members,
    class_size,
    enumerate_types,
    gram_rank,
    representative,
    type_of,
)


def descriptor_alphabet(descriptor: TypeDescriptor) -> Alphabet:
    if isinstance(descriptor, ExchangeableType):
        return Alphabet(len(descriptor.counts))
    if isinstance(descriptor, MarkovType):
        return Alphabet(len(descriptor.trans))
    if isinstance(descriptor, LMarkovType):
        return Alphabet(len(descriptor.trans[0]))
    if isinstance(descriptor, ProductType):
        sizes = tuple(descriptor_alphabet(p).size for p in descriptor.parts)
        return Alphabet(math.prod(sizes), sizes)
    raise TypeError(f"unknown descriptor {descriptor!r}")


def uniform_class_dist(
    descriptor: TypeDescriptor,
    n: int,
    cap: int = DEFAULT_ENUM_CAP,
    alphabet: Optional[Alphabet] = None,
) -> FiniteDistribution:
    """Q_k: uniform distribution on the class (an extreme point)."""
    size = class_size(descriptor, n)
    if size == 0:
        raise EmptyClass(f"{descriptor} is realized by no word of length {n}")
    members = class_members(descriptor, n, cap)
    p = Fraction(1, size)
    alphabet = alphabet or descriptor_alphabet(descriptor)
    return FiniteDistribution(alphabet, n, {w: p for w in members})


def pi_value(descriptor: TypeDescriptor, word: Word, n: int) -> Fraction:
    """Value of the empirical comparison distribution pi_k at one word.

    Never-visited states (zero row sums) get a uniform kernel row; class
    members never traverse such a row, so certified quantities are unaffected.
    """
    word = tuple(word)
    if isinstance(descriptor, ExchangeableType):
        total = sum(descriptor.counts)
        value = ONE
        for letter in word:
            value *= Fraction(descriptor.counts[letter], total)
            if not value:
                return ZERO
        return value
    if isinstance(descriptor, MarkovType):
        if word[0] != descriptor.start:
            return ZERO
        d = len(descriptor.trans)
        sums = descriptor.row_sums()
        value = ONE
        for a, b in zip(word, word[1:]):
            value *= Fraction(descriptor.trans[a][b], sums[a]) if sums[a] else Fraction(1, d)
            if not value:
                return ZERO
        return value
    if isinstance(descriptor, LMarkovType):
        ell = descriptor.ell
        if word[:ell] != descriptor.start:
            return ZERO
        d = len(descriptor.trans[0])
        sums = [sum(row) for row in descriptor.trans]
        value = ONE
        for i in range(len(word) - ell):
            g = gram_rank(word[i : i + ell], d)
            row_sum = sums[g]
            value *= Fraction(descriptor.trans[g][word[i + ell]], row_sum) if row_sum else Fraction(1, d)
            if not value:
                return ZERO
        return value
    if isinstance(descriptor, ProductType):
        alphabet = descriptor_alphabet(descriptor)
        value = ONE
        for i, part in enumerate(descriptor.parts):
            projected = tuple(alphabet.unpack(letter)[i] for letter in word)
            value *= pi_value(part, projected, n)
            if not value:
                return ZERO
        return value
    raise TypeError(f"unknown descriptor {descriptor!r}")


def empirical_pi(
    descriptor: TypeDescriptor,
    n: int,
    cap: int = DEFAULT_ENUM_CAP,
    alphabet: Optional[Alphabet] = None,
) -> FiniteDistribution:
    """Materialized pi_k over V^n (sparse on its support)."""
    if class_size(descriptor, n) == 0:
        raise EmptyClass(f"{descriptor} is realized by no word of length {n}")
    alphabet = alphabet or descriptor_alphabet(descriptor)
    entries = {}
    for word in alphabet.words(n, cap):
        v = pi_value(descriptor, word, n)
        if v:
            entries[word] = v
    return FiniteDistribution(alphabet, n, entries)


def alpha_tight(descriptor: TypeDescriptor, n: int) -> Fraction:
    """Exact max over the class support of Q_k / pi_k (class-constant)."""
    size = class_size(descriptor, n)
    if size == 0:
        raise EmptyClass(f"{descriptor} is realized by no word of length {n}")
    rep = representative(descriptor, n)
    return 1 / (size * pi_value(descriptor, rep, n))


# -- analytic pre-factor --------------------------------------------------------


@dataclass(frozen=True)
class AlphaBound:
    """Interval enclosure of the variant's analytic alpha(n), with the degree
    of the full polynomial pre-factor N * alpha(n)^2."""

    relation: Relation
    n: int
    d: int
    value: IntervalScalar
    squared: IntervalScalar
    degree: int


def _alpha_squared(relation: Relation, n: int, alphabet: Alphabet, bits: int) -> tuple[IntervalScalar, int]:
    d = alphabet.size
    e2 = IntervalScalar.euler_e(bits) ** 2
    two_pi = IntervalScalar.two_pi(bits)
    if isinstance(relation, Exchangeable):
        if n < 1:
            raise BadParams("n must be >= 1")
        sq = (e2**d) * Fraction(n ** (d - 1), d**d) / two_pi
        return sq, 2 * (d - 1)
    if isinstance(relation, Markov):
        if n < 2:
            raise BadParams("Markov pre-factor needs n >= 2")
        sq = (e2 ** (d * d)) * Fraction((n - 1) ** (d * (d + 1)), d ** ((2 * d + 1) * d)) / (two_pi**d)
        return sq, d * (2 * d + 1) - 1
    if isinstance(relation, LMarkov):
        ell = relation.ell
        if n < ell + 1:
            raise BadParams(f"l-Markov({ell}) pre-factor needs n >= {ell + 1}")
        m = d**ell
        sq = (e2 ** (d * m)) * Fraction((n - ell) ** (m * (d + 1)), d ** (((ell + 1) * d + ell) * m)) / (two_pi**m)
        return sq, m * (2 * d + 1) - 1
    if isinstance(relation, ProductRelation):
        if alphabet.factors is None or len(alphabet.factors) != len(relation.parts):
            raise BadParams("product relation needs a matching factored alphabet")
        sq = IntervalScalar.exact(1, bits)
        degree = 0
        for rel, f in zip(relation.parts, alphabet.factors):
            part_sq, part_deg = _alpha_squared(rel, n, Alphabet(f), bits)
            sq = sq * part_sq
            degree += part_deg
        return sq, degree
    raise TypeError(f"unknown relation {relation!r}")


def alpha_analytic(
    relation: Relation, n: int, alphabet: Alphabet | int, bits: int = DEFAULT_BITS
) -> AlphaBound:
    """Enclosure of the closed-form alpha(n) for the relation variant.

    Computed from alpha(n)^2, which is rational times integer powers of e^2
    and 1/(2*pi); the square root is the only extra enclosure step.
    """
    if isinstance(alphabet, int):
        alphabet = Alphabet(alphabet)
    squared, degree = _alpha_squared(relation, n, alphabet, bits)
    return AlphaBound(relation, n, alphabet.size, squared.sqrt(bits), squared, degree)


# -- fidelity ---------------------------------------------------------------------


def _is_square(x: Fraction) -> Optional[Fraction]:
    ns = math.isqrt(x.numerator)
    ds = math.isqrt(x.denominator)
    if ns * ns == x.numerator and ds * ds == x.denominator:
        return Fraction(ns, ds)
    return None


def fidelity_sq_from_pairs(
    pairs: Sequence[tuple[Fraction, int]], bits: int = DEFAULT_BITS
) -> IntervalScalar:
    """(sum_i m_i sqrt(r_i))^2 for rational r_i >= 0 with multiplicities m_i.

    Exact point interval when all the r_i differ by perfect-square factors
    (single common surd); outward-rounded interval otherwise.
    """
    pairs = [(r, m) for r, m in pairs if r and m]
    if not pairs:
        return IntervalScalar.exact(0, bits)
    base = pairs[0][0]
    coeff = Fraction(0)
    for r, m in pairs:
        root = _is_square(r / base)
        if root is None:
            coeff = None
            break
        coeff += m * root
    if coeff is not None:
        return IntervalScalar.exact(coeff * coeff * base, bits)
    total = IntervalScalar.exact(0, bits)
    for r, m in pairs:
        lo, hi = sqrt_bounds(r, bits)
        total = total + IntervalScalar(lo, hi, bits) * m
    return total**2


def fidelity_squared(
    p: FiniteDistribution, q: FiniteDistribution, bits: int = DEFAULT_BITS
) -> IntervalScalar:
    """F(P,Q)^2 with F(P,Q) = sum_z sqrt(P(z) Q(z))."""
    p.same_shape(q)
    products: dict[Fraction, int] = {}
    for word, pv in p.entries.items():
        qv = q(word)
        if qv:
            r = pv * qv
            products[r] = products.get(r, 0) + 1
    return fidelity_sq_from_pairs(list(products.items()), bits)


# -- simplex decomposition ---------------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """P = sum_k mu_k Q_k with mu_k = |C_k| * P(representative of C_k)."""

    index: ClassIndex
    weights: tuple[Fraction, ...]
    representatives: tuple[Word, ...]

    def remix(self, cap: int = DEFAULT_ENUM_CAP) -> FiniteDistribution:
        entries: dict[Word, Fraction] = {}
        for (descr, size), mu in zip(self.index.items, self.weights):
            if not mu:
                continue
            share = mu / size
            for w in class_members(descr, self.index.n, cap):
                entries[w] = entries.get(w, ZERO) + share
        return FiniteDistribution(self.index.alphabet, self.index.n, entries)


def check_exchangeable(
    p: FiniteDistribution, relation: Relation, cap: int = DEFAULT_ENUM_CAP
) -> None:
    """Raise NotExchangeable with a witness pair unless P is constant on classes."""
    groups: dict[TypeDescriptor, list[Word]] = {}
    for word in p.support():
        groups.setdefault(type_of(word, relation, p.alphabet), []).append(word)
    for descr, words in groups.items():
        value = p(words[0])
        for w in words[1:]:
            if p(w) != value:
                raise NotExchangeable(
                    f"P({words[0]}) = {value} but P({w}) = {p(w)} on the same class",
                    witness=(words[0], w),
                )
        size = class_size(descr, p.n)
        if len(words) != size:
            missing = next(w for w in class_members(descr, p.n, cap) if not p(w))
            raise NotExchangeable(
                f"P({words[0]}) = {value} but P({missing}) = 0 on the same class",
                witness=(words[0], missing),
            )


def decompose(
    p: FiniteDistribution, relation: Relation, cap: int = DEFAULT_ENUM_CAP
) -> Decomposition:
    """Unique simplex weights of P against the extreme class distributions."""
    check_exchangeable(p, relation, cap)
    index = enumerate_types(relation, p.alphabet, p.n, cap)
    reps = tuple(representative(descr, p.n) for descr, _ in index.items)
    weights = tuple(size * p(rep) for (descr, size), rep in zip(index.items, reps))
    assert sum(weights, ZERO) == ONE
    return Decomposition(index, weights, reps)


# -- flexible reduction certificate -------------------------------------------------


@dataclass(frozen=True)
class ClassRecord:
    descriptor: TypeDescriptor
    size: int
    tight_ratio: Fraction
    fidelity_sq: IntervalScalar
    verdict: str
    tight_within_analytic: bool


@dataclass(frozen=True)
class ReductionCertificate:
    relation: Relation
    n: int
    d: int
    verdict: str  # "holds" | "fails" | "inconclusive"
    alpha: AlphaBound
    alpha_tight_max: Fraction
    prefactor: IntervalScalar  # N * alpha(n)^2
    records: tuple[ClassRecord, ...]
    weights: tuple[Fraction, ...]
    bits: int
    alpha_mode: str

    @property
    def N(self) -> int:
        return len(self.records)


def verify_flexible_reduction(
    p: FiniteDistribution,
    relation: Relation,
    bits: int = DEFAULT_BITS,
    max_bits: int = MAX_BITS,
    cap: int = DEFAULT_ENUM_CAP,
    alpha_mode: str = "analytic",
    threads: int = 1,
) -> ReductionCertificate:
    """Certify P <= N alpha(n)^2 sum_k (1/N) F(P, pi_k)^2 pi_k per class.

    ``alpha_mode`` picks the constant in the pre-factor: "analytic" uses the
    closed-form alpha(n) (the paper's statement; can under-shoot at small n
    for Markov-family classes with never-visited states), "tight" uses the
    exact max_k of the per-class ratios, which always certifies.
    """
    decomp = decompose(p, relation, cap)
    index, reps = decomp.index, decomp.representatives
    n, d = p.n, p.alphabet.size
    descriptors = index.descriptors()
    sizes = [size for _, size in index.items]
    p_values = [mu / size for mu, size in zip(decomp.weights, sizes)]

    pi_table = [
        [pi_value(k_descr, rep, n) for rep in reps] for k_descr in descriptors
    ]
    tight = [alpha_tight(descr, n) for descr in descriptors]
    tight_max = max(tight)

    analytic = alpha_analytic(relation, n, p.alphabet, bits)
    result: Optional[ReductionCertificate] = None
    while True:
        alpha_sq = (
            analytic.squared
            if alpha_mode == "analytic"
            else IntervalScalar.exact(tight_max, bits) ** 2
        )

        def one_fidelity(row):
            return fidelity_sq_from_pairs(
                [(pv * row[c], sizes[c]) for c, pv in enumerate(p_values)], bits
            )

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                fid_sq = list(pool.map(one_fidelity, pi_table))
        else:
            fid_sq = [one_fidelity(row) for row in pi_table]
        records = []
        n_fail = n_open = 0
        for c, descr in enumerate(descriptors):
            rhs = IntervalScalar.exact(0, bits)
            for k in range(index.N):
                if pi_table[k][c]:
                    rhs = rhs + fid_sq[k] * pi_table[k][c]
            rhs = rhs * alpha_sq
            lhs = p_values[c]
            ok = rhs.certainly_ge(lhs)
            verdict = "holds" if ok else ("fails" if ok is False else "inconclusive")
            n_fail += verdict == "fails"
            n_open += verdict == "inconclusive"
            records.append(
                ClassRecord(
                    descriptor=descr,
                    size=sizes[c],
                    tight_ratio=tight[c],
                    fidelity_sq=fid_sq[c],
                    verdict=verdict,
                    tight_within_analytic=bool(
                        analytic.value.certainly_ge(tight[c])
                    ),
                )
            )
        overall = "fails" if n_fail else ("inconclusive" if n_open else "holds")
        result = ReductionCertificate(
            relation=relation,
            n=n,
            d=d,
            verdict=overall,
            alpha=analytic,
            alpha_tight_max=tight_max,
            prefactor=alpha_sq * index.N,
            records=tuple(records),
            weights=decomp.weights,
            bits=bits,
            alpha_mode=alpha_mode,
        )
        if overall != "inconclusive":
            return result
        next_bits = escalate_bits(bits, max_bits)
        if next_bits is None:
            return result
        bits = next_bits
        analytic = alpha_analytic(relation, n, p.alphabet, bits)


# -- Stirling sandwich ---------------------------------------------------------------


def stirling_bounds(p: int, bits: int = DEFAULT_BITS) -> tuple[IntervalScalar, IntervalScalar]:
    """Enclosures of sqrt(2 pi) p^(p+1/2) e^-p and e p^(p+1/2) e^-p.

    The true values sandwich p!; at p = 1 the upper bound equals 1! exactly
    and is returned as a point interval.
    """
    if p < 1:
        raise BadParams("Stirling bounds need p >= 1")
    radicand = p ** (2 * p + 1)
    e_pow = IntervalScalar.euler_e(bits) ** p
    lower = (IntervalScalar.two_pi(bits) * radicand).sqrt(bits) / e_pow
    lo, hi = sqrt_bounds(Fraction(radicand), bits)
    upper = IntervalScalar(lo, hi, bits) / (IntervalScalar.euler_e(bits) ** (p - 1))
    return lower, upper
