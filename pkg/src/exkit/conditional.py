"""Universal conditional reductions for exchangeable joints on (A x X)^n.

Conditioning an exchangeable joint P on its X^n-marginal admits a universal
(P-independent) pointwise bound

    P(a|x) <= N * alpha(n) * alpha'(n) * sum_k (1/N) pi_k(a|x)

where the pi_k are the empirical i.i.d. distributions of the joint classes
and alpha'(n) compares pi_{k,X^n} against the X^n-marginal of the extreme
Q_k on its support.  For exchangeability that marginal is itself an extreme
X-class distribution (the marginal lemma), which pins alpha'(n) = 1; the
same lemma fails for Markov exchangeability, reproduced here as an explicit
counterexample.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .core import (
    Alphabet,
    ConditionalDistribution,
    DEFAULT_ENUM_CAP,
    FiniteDistribution,
    Word,
    ZERO,
    ONE,
    dirac,
    marginal,
    project_word,
)
from .errors import NotConditionallyExchangeable, NotExchangeable, NotFactored
from .intervals import DEFAULT_BITS, IntervalScalar, escalate_bits
from .reduction import alpha_analytic, check_exchangeable, pi_value, AlphaBound
from .relations import (
    EXCHANGEABLE,
    MARKOV,
    ExchangeableType,
    Relation,
    class_size,
    enumerate_types,
    representative,
    type_of,
)

A_FACTOR = 0
X_FACTOR = 1


def _split_alphabet(joint: Alphabet) -> tuple[Alphabet, Alphabet]:
    if joint.factors is None or len(joint.factors) != 2:
        raise NotFactored("conditioning needs an alphabet factored as (A, X)")
    return Alphabet(joint.factors[A_FACTOR]), Alphabet(joint.factors[X_FACTOR])


def condition(p: FiniteDistribution) -> ConditionalDistribution:
    """Extract P(a | x) = P(a, x) / P_X(x) on inputs with positive marginal."""
    a_alpha, x_alpha = _split_alphabet(p.alphabet)
    p_x = marginal(p, X_FACTOR)
    by_input: dict[Word, dict[Word, Fraction]] = {}
    for word, value in p.entries.items():
        x_word = project_word(p.alphabet, word, X_FACTOR)
        a_word = project_word(p.alphabet, word, A_FACTOR)
        by_input.setdefault(x_word, {})[a_word] = value / p_x(x_word)
    slices = {
        x_word: FiniteDistribution(a_alpha, p.n, table)
        for x_word, table in by_input.items()
    }
    return ConditionalDistribution(x_alpha, a_alpha, p.n, slices)


def lift_conditional(
    pc: ConditionalDistribution,
    relation: Relation = EXCHANGEABLE,
    cap: int = DEFAULT_ENUM_CAP,
) -> FiniteDistribution:
    """Joint P'(a,x) = Q(x) P(a|x) with Q uniform over the conditional's
    input table, so that P' is relation-invariant and condition(P') == pc.

    Raises NotConditionallyExchangeable (with a witness pair) when pc is not
    constant across equivalent (a,x) pairs or its input table is not closed
    under the X-projection of the relation.
    """
    inputs = sorted(pc.inputs())
    if not inputs:
        raise NotConditionallyExchangeable("empty conditional table")
    d_a = pc.output_alphabet.size
    d_x = pc.input_alphabet.size
    joint = Alphabet(d_a * d_x, (d_a, d_x))
    weight = Fraction(1, len(inputs))
    entries: dict[Word, Fraction] = {}
    for x_word in inputs:
        dist = pc.slices[tuple(x_word)]
        for a_word, value in dist.entries.items():
            packed = tuple(
                joint.pack((a, x)) for a, x in zip(a_word, x_word)
            )
            entries[packed] = weight * value
    lifted = FiniteDistribution(joint, pc.n, entries)
    try:
        check_exchangeable(lifted, relation, cap)
    except NotExchangeable as err:
        raise NotConditionallyExchangeable(str(err), witness=err.witness) from None
    return lifted


def marginal_type(joint_type: ExchangeableType, joint_alphabet: Alphabet) -> ExchangeableType:
    """X-type supporting the X^n-marginal of the extreme joint Q_type; the
    marginal is the uniform distribution on that X-class."""
    _, x_alpha = _split_alphabet(joint_alphabet)
    counts = [0] * x_alpha.size
    for letter, c in enumerate(joint_type.counts):
        counts[joint_alphabet.unpack(letter)[X_FACTOR]] += c
    return ExchangeableType(tuple(counts))


@dataclass(frozen=True)
class CounterexampleReport:
    """The Markov marginal counterexample of a Dirac joint class whose
    X-marginal is not Markov exchangeable."""

    joint_sequence: tuple[tuple[int, int], ...]
    x_marginal_support: Word
    x_class_members: tuple[Word, ...]
    marginal_masses: tuple[Fraction, ...]
    marginal_is_markov_exchangeable: bool
    exchangeable_analogue_holds: bool


def markov_marginal_counterexample() -> CounterexampleReport:
    """Reproduce the (ax) = ((1,1),(1,2),(2,1),(2,1)) counterexample.

    The joint Markov class is the single sequence above, so the X-marginal is
    the Dirac mass at x = (1,2,1,1); the Markov X-class of x also contains
    (1,1,2,1), on which the marginal puts no mass.  The exchangeable analogue
    (the marginal lemma) is verified to hold on the same alphabet sizes.
    """
    pairs = ((0, 0), (0, 1), (1, 0), (1, 0))  # 0-indexed (a, x) letters
    joint = Alphabet(4, (2, 2))
    word = tuple(joint.pack(p) for p in pairs)
    joint_type = type_of(word, MARKOV, joint)
    assert class_size(joint_type, 4) == 1
    q_joint = dirac(joint, word)
    q_x = marginal(q_joint, X_FACTOR)
    x_word = project_word(joint, word, X_FACTOR)
    x_alpha = Alphabet(2)
    x_type = type_of(x_word, MARKOV, x_alpha)
    from .relations import class_members

    members = tuple(sorted(class_members(x_type, 4)))
    masses = tuple(q_x(m) for m in members)
    is_invariant = len(set(masses)) == 1

    exch_ok = True
    for n in range(1, 5):
        for descr, _ in enumerate_types(EXCHANGEABLE, joint, n).items:
            from .reduction import uniform_class_dist

            q = uniform_class_dist(descr, n, alphabet=joint)
            expected_type = marginal_type(descr, joint)
            got = marginal(q, X_FACTOR)
            size = class_size(expected_type, n)
            uniform_ok = all(v == Fraction(1, size) for v in got.entries.values())
            if not uniform_ok or len(got.entries) != size:
                exch_ok = False
    return CounterexampleReport(
        joint_sequence=pairs,
        x_marginal_support=x_word,
        x_class_members=members,
        marginal_masses=masses,
        marginal_is_markov_exchangeable=is_invariant,
        exchangeable_analogue_holds=exch_ok,
    )


def empirical_alpha_prime(
    descriptor, joint_alphabet: Alphabet, n: int, cap: int = DEFAULT_ENUM_CAP
) -> Fraction:
    """Tight ratio max pi_{k,X^n} / Q_{k,X^n} over the support of Q_{k,X^n}.

    For exchangeable joint types this never exceeds 1 (the marginal lemma);
    for Markov-family types the value is reported as observed, with no claim
    about its growth in n.
    """
    from .reduction import empirical_pi, uniform_class_dist

    q_x = marginal(uniform_class_dist(descriptor, n, cap, alphabet=joint_alphabet), X_FACTOR)
    pi_x = marginal(empirical_pi(descriptor, n, cap, alphabet=joint_alphabet), X_FACTOR)
    return max(pi_x(x) / q_x(x) for x in q_x.support())


@dataclass(frozen=True)
class ConditionalClassRecord:
    descriptor: ExchangeableType
    verdict: str  # "holds" | "fails" | "inconclusive" | "unsupported"
    rhs_sum: Fraction  # sum_k pi_k(a|x) at the class representative
    alpha_prime_used: Fraction
    alpha_prime_tight: Fraction  # class probability of the X-marginal, <= 1


@dataclass(frozen=True)
class ConditionalCertificate:
    a_size: int
    x_size: int
    n: int
    verdict: str
    alpha: AlphaBound
    prefactor: IntervalScalar  # N * alpha(n) * alpha'(n)
    records: tuple[ConditionalClassRecord, ...]
    bits: int

    @property
    def N(self) -> int:
        return len(self.records)

    def universal_rhs_table(self) -> tuple[tuple[tuple[int, ...], str], ...]:
        """P-independent payload: per class, the exact rational RHS sum.
        Byte-identical across every conditioned P on the same (A, X, n)."""
        return tuple(
            (rec.descriptor.counts, f"{rec.rhs_sum.numerator}/{rec.rhs_sum.denominator}")
            for rec in self.records
        )


def verify_conditional_reduction(
    p: Union[FiniteDistribution, ConditionalDistribution],
    bits: int = DEFAULT_BITS,
    cap: int = DEFAULT_ENUM_CAP,
) -> ConditionalCertificate:
    """Certify P(a|x) <= N alpha(n) alpha'(n) sum_k (1/N) pi_k(a|x) per class.

    Exchangeable relation only.  Both sides are constant on joint classes, so
    one representative (a, x) per class is checked; inputs x outside the
    support of P_X are marked unsupported (the inequality is vacuous there).
    The right-hand side never depends on P.
    """
    if isinstance(p, ConditionalDistribution):
        p = lift_conditional(p, EXCHANGEABLE, cap)
    check_exchangeable(p, EXCHANGEABLE, cap)
    joint_alpha = p.alphabet
    a_alpha, x_alpha = _split_alphabet(joint_alpha)
    n = p.n
    index = enumerate_types(EXCHANGEABLE, joint_alpha, n, cap)
    descriptors = index.descriptors()
    reps = [representative(d, n) for d in descriptors]
    x_reps = [project_word(joint_alpha, rep, X_FACTOR) for rep in reps]

    # X-marginal empirical types sigma_k of each pi_k (exact rationals).
    sigma = [marginal_type(d, joint_alpha) for d in descriptors]

    rhs_sums = []
    for c, rep in enumerate(reps):
        total = ZERO
        x_rep = x_reps[c]
        for k, descr_k in enumerate(descriptors):
            sx = pi_value(sigma[k], x_rep, n)
            if sx:
                total += pi_value(descr_k, rep, n) / sx
        rhs_sums.append(total)

    # alpha'_k: tight ratio pi_{k,X^n}/Q_{k,X^n} on the support, always <= 1
    # for exchangeability; the certificate uses the valid constant 1.
    alpha_prime_tight = []
    for k, descr_k in enumerate(descriptors):
        x_type = sigma[k]
        x_class = class_size(x_type, n)
        ratio = x_class * pi_value(x_type, representative(x_type, n), n)
        alpha_prime_tight.append(ratio)

    p_x = marginal(p, X_FACTOR)
    while True:
        analytic = alpha_analytic(EXCHANGEABLE, n, joint_alpha, bits)
        records = []
        n_fail = n_open = 0
        for c, descr in enumerate(descriptors):
            if p_x(x_reps[c]) == 0:
                verdict = "unsupported"
            else:
                lhs = p(reps[c]) / p_x(x_reps[c])
                rhs = analytic.value * rhs_sums[c]
                ok = rhs.certainly_ge(lhs)
                verdict = "holds" if ok else ("fails" if ok is False else "inconclusive")
                n_fail += verdict == "fails"
                n_open += verdict == "inconclusive"
            records.append(
                ConditionalClassRecord(
                    descriptor=descr,
                    verdict=verdict,
                    rhs_sum=rhs_sums[c],
                    alpha_prime_used=ONE,
                    alpha_prime_tight=alpha_prime_tight[c],
                )
            )
        overall = "fails" if n_fail else ("inconclusive" if n_open else "holds")
        cert = ConditionalCertificate(
            a_size=a_alpha.size,
            x_size=x_alpha.size,
            n=n,
            verdict=overall,
            alpha=analytic,
            prefactor=analytic.value * index.N,
            records=tuple(records),
            bits=bits,
        )
        if overall != "inconclusive":
            return cert
        next_bits = escalate_bits(bits)
        if next_bits is None:
            return cert
        bits = next_bits
