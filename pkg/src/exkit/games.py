"""Two-player non-local games: exact classical values, repetition, reduction bounds.

A game is an input law T on X x Y plus a winning predicate V on X x Y x A x B.
Classical values are exact maxima over deterministic strategy pairs (shared
randomness cannot beat the maximum by convexity).  Repeating a game n times,
in parallel (i.i.d. inputs) or sequentially (Markov inputs), makes the joint
weight T(xy) * S(ab|xy) a distribution on (X x Y x A x B)^n that inherits the
round symmetry, so the flexible reduction machinery upper-bounds the winning
probability by a mixture of per-round i.i.d. / Markov surrogates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .core import Alphabet, DEFAULT_ENUM_CAP, FiniteDistribution, Word, ZERO, ONE
from .errors import BadParams, CapExceeded, DimensionMismatch, KernelNotStationary
from .intervals import DEFAULT_BITS, IntervalScalar
from .reduction import alpha_analytic, alpha_tight, check_exchangeable, fidelity_sq_from_pairs, pi_value
from .relations import (
    EXCHANGEABLE,
    MARKOV,
    Exchangeable,
    Relation,
    enumerate_types,
    representative,
    type_of,
)


@dataclass(frozen=True)
class Game:
    inputs_x: tuple
    inputs_y: tuple
    outputs_a: tuple
    outputs_b: tuple
    input_law: Mapping[tuple, Fraction]  # keyed (x, y), sums to 1
    predicate: frozenset  # accepted (x, y, a, b) tuples

    def __post_init__(self) -> None:
        law = {k: Fraction(v) for k, v in self.input_law.items()}
        if sum(law.values(), ZERO) != ONE or any(v < 0 for v in law.values()):
            raise BadParams("input law must be a probability distribution")
        object.__setattr__(self, "input_law", law)
        object.__setattr__(self, "predicate", frozenset(self.predicate))

    def law(self, x, y) -> Fraction:
        return self.input_law.get((x, y), ZERO)

    def wins(self, x, y, a, b) -> bool:
        return (x, y, a, b) in self.predicate


@dataclass(frozen=True)
class Strategy:
    """Conditional law P(a, b | x, y): one output distribution per input pair."""

    table: Mapping[tuple, Mapping[tuple, Fraction]]

    def __post_init__(self) -> None:
        clean = {}
        for xy, row in self.table.items():
            row = {ab: Fraction(v) for ab, v in row.items() if Fraction(v)}
            if sum(row.values(), ZERO) != ONE or any(v < 0 for v in row.values()):
                raise BadParams(f"strategy slice at {xy} is not a distribution")
            clean[xy] = row
        object.__setattr__(self, "table", clean)

    def prob(self, a, b, x, y) -> Fraction:
        return self.table[(x, y)].get((a, b), ZERO)


def deterministic_strategy(game: Game, f: Mapping, g: Mapping) -> Strategy:
    """Local strategy from Alice's table f: X -> A and Bob's g: Y -> B."""
    return Strategy(
        {
            (x, y): {(f[x], g[y]): ONE}
            for x in game.inputs_x
            for y in game.inputs_y
        }
    )


def winning_probability(game: Game, strategy: Strategy) -> Fraction:
    total = ZERO
    for (x, y), t in game.input_law.items():
        if not t:
            continue
        row = strategy.table.get((x, y))
        if row is None:
            raise DimensionMismatch(f"strategy has no slice for input {(x, y)}")
        for (a, b), p in row.items():
            if game.wins(x, y, a, b):
                total += t * p
    return total


def classical_value(game: Game, cap: int = DEFAULT_ENUM_CAP) -> tuple[Fraction, Strategy]:
    """Exact max over deterministic strategy pairs, with an achieving witness."""
    n_pairs = len(game.outputs_a) ** len(game.inputs_x) * len(game.outputs_b) ** len(
        game.inputs_y
    )
    if n_pairs > cap:
        raise CapExceeded(f"{n_pairs} deterministic strategies exceed cap {cap}")
    # Scores grouped by Bob's table first so Alice's best reply is a cheap max.
    best: Optional[tuple[Fraction, dict, dict]] = None
    for g_choice in itertools.product(game.outputs_b, repeat=len(game.inputs_y)):
        g = dict(zip(game.inputs_y, g_choice))
        for f_choice in itertools.product(game.outputs_a, repeat=len(game.inputs_x)):
            f = dict(zip(game.inputs_x, f_choice))
            score = ZERO
            for (x, y), t in game.input_law.items():
                if t and game.wins(x, y, f[x], g[y]):
                    score += t
            if best is None or score > best[0]:
                best = (score, f, g)
    assert best is not None
    return best[0], deterministic_strategy(game, best[1], best[2])


def parallel_game(game: Game, n: int, cap: int = DEFAULT_ENUM_CAP) -> Game:
    """n parallel rounds: i.i.d. inputs, win iff every round's predicate holds."""
    if n < 1:
        raise BadParams("n must be >= 1")
    if n == 1:
        return game
    size = (
        (len(game.inputs_x) * len(game.inputs_y)) ** n
        * (len(game.outputs_a) * len(game.outputs_b)) ** n
    )
    if size > cap:
        raise CapExceeded("repeated game exceeds enumeration cap")
    xs = tuple(itertools.product(game.inputs_x, repeat=n))
    ys = tuple(itertools.product(game.inputs_y, repeat=n))
    as_ = tuple(itertools.product(game.outputs_a, repeat=n))
    bs = tuple(itertools.product(game.outputs_b, repeat=n))
    law = {}
    for xt in xs:
        for yt in ys:
            value = ONE
            for x, y in zip(xt, yt):
                value *= game.law(x, y)
                if not value:
                    break
            if value:
                law[(xt, yt)] = value
    predicate = frozenset(
        (xt, yt, at, bt)
        for xt in xs
        for yt in ys
        for at in as_
        for bt in bs
        if all(game.wins(x, y, a, b) for x, y, a, b in zip(xt, yt, at, bt))
    )
    return Game(xs, ys, as_, bs, law, predicate)


@dataclass(frozen=True)
class SequentialKernel:
    """Transition kernel on input pairs; rows over the next pair sum to 1.

    Against a game's input law T the stationarity constraint
    sum_prev T(prev) K(prev -> next) = T(next) is required, i.e. the edge
    measure T(prev) K(prev -> next) has both marginals equal to T.
    """

    rows: Mapping[tuple, Mapping[tuple, Fraction]]

    def __post_init__(self) -> None:
        clean = {}
        for prev, row in self.rows.items():
            row = {nxt: Fraction(v) for nxt, v in row.items() if Fraction(v)}
            if sum(row.values(), ZERO) != ONE or any(v < 0 for v in row.values()):
                raise BadParams(f"kernel row at {prev} is not a distribution")
            clean[prev] = row
        object.__setattr__(self, "rows", clean)

    def prob(self, prev: tuple, nxt: tuple) -> Fraction:
        return self.rows.get(prev, {}).get(nxt, ZERO)

    def check_stationary(self, game: Game) -> None:
        pairs = [(x, y) for x in game.inputs_x for y in game.inputs_y]
        for nxt in pairs:
            total = sum((game.law(*prev) * self.prob(prev, nxt) for prev in pairs), ZERO)
            if total != game.law(*nxt):
                raise KernelNotStationary(
                    f"sum_prev T(prev) K(prev, {nxt}) = {total} != T{nxt}"
                )


def iid_kernel(game: Game) -> SequentialKernel:
    pairs = [
        (x, y) for x in game.inputs_x for y in game.inputs_y if game.law(x, y)
    ]
    return SequentialKernel(
        {prev: {nxt: game.law(*nxt) for nxt in pairs} for prev in pairs}
    )


def sequential_game(
    game: Game, kernel: SequentialKernel, n: int, cap: int = DEFAULT_ENUM_CAP
) -> Game:
    """n sequential rounds: first input pair from T, later pairs from the
    kernel; the win predicate is the same AND over rounds as in parallel."""
    if n < 1:
        raise BadParams("n must be >= 1")
    kernel.check_stationary(game)
    if n == 1:
        return game
    base = parallel_game(game, n, cap)
    law = {}
    for xt in base.inputs_x:
        for yt in base.inputs_y:
            pairs = list(zip(xt, yt))
            value = game.law(*pairs[0])
            for prev, nxt in zip(pairs, pairs[1:]):
                if not value:
                    break
                value *= kernel.prob(prev, nxt)
            if value:
                law[(xt, yt)] = value
    return Game(
        base.inputs_x, base.inputs_y, base.outputs_a, base.outputs_b, law, base.predicate
    )


# -- bridging to the reduction machinery -------------------------------------------


def _round_alphabet(game: Game) -> Alphabet:
    sizes = (
        len(game.inputs_x),
        len(game.inputs_y),
        len(game.outputs_a),
        len(game.outputs_b),
    )
    return Alphabet(sizes[0] * sizes[1] * sizes[2] * sizes[3], sizes)


def joint_weight(
    game: Game, repeated: Game, strategy: Strategy, n: int
) -> FiniteDistribution:
    """Distribution of one play on (X x Y x A x B)^n: input law times strategy."""
    alphabet = _round_alphabet(game)
    xi = {x: i for i, x in enumerate(game.inputs_x)}
    yi = {y: i for i, y in enumerate(game.inputs_y)}
    ai = {a: i for i, a in enumerate(game.outputs_a)}
    bi = {b: i for i, b in enumerate(game.outputs_b)}
    entries: dict[Word, Fraction] = {}
    for (xt, yt), t in repeated.input_law.items():
        if not t:
            continue
        for (at, bt), p in strategy.table.get((xt, yt), {}).items():
            if not p:
                continue
            if n == 1:
                xt_, yt_, at_, bt_ = (xt,), (yt,), (at,), (bt,)
            else:
                xt_, yt_, at_, bt_ = xt, yt, at, bt
            word = tuple(
                alphabet.pack((xi[x], yi[y], ai[a], bi[b]))
                for x, y, a, b in zip(xt_, yt_, at_, bt_)
            )
            entries[word] = entries.get(word, ZERO) + t * p
    return FiniteDistribution(alphabet, n, entries)


def _word_to_play(game: Game, word: Word, alphabet: Alphabet):
    xs, ys, as_, bs = [], [], [], []
    for letter in word:
        x, y, a, b = alphabet.unpack(letter)
        xs.append(game.inputs_x[x])
        ys.append(game.inputs_y[y])
        as_.append(game.outputs_a[a])
        bs.append(game.outputs_b[b])
    return tuple(xs), tuple(ys), tuple(as_), tuple(bs)


def symmetrize_strategy(
    game: Game,
    repeated: Game,
    strategy: Strategy,
    relation: Relation = EXCHANGEABLE,
    cap: int = DEFAULT_ENUM_CAP,
) -> Strategy:
    """Average the played joint weight over the relation's classes on
    (X x Y x A x B)^n and re-condition on the averaged input marginal.

    Under the exchangeable relation the output is always an invariant
    conditional with the same winning probability (class-averaging is the
    symmetric-group average, which commutes with the input marginal).  Under
    the Markov relation that commutation can fail for large n, so invariance
    of the result is guaranteed only for inputs whose joint weight is already
    class-constant (e.g. tensor-power strategies, or any strategy at n = 2
    where Markov classes are singletons); definetti_upper_bound re-checks the
    property and raises NotExchangeable rather than proceeding silently.
    """
    n = len(repeated.inputs_x[0]) if isinstance(repeated.inputs_x[0], tuple) else 1
    alphabet = _round_alphabet(game)
    w = joint_weight(game, repeated, strategy, n)
    groups: dict = {}
    for word in alphabet.words(n, cap):
        groups.setdefault(type_of(word, relation, alphabet), []).append(word)
    averaged: dict[Word, Fraction] = {}
    for words in groups.values():
        total = sum((w(x) for x in words), ZERO)
        if total:
            share = total / len(words)
            for word in words:
                averaged[word] = share
    marg: dict[tuple, Fraction] = {}
    cond: dict[tuple, dict[tuple, Fraction]] = {}
    for word, value in averaged.items():
        xt, yt, at, bt = _word_to_play(game, word, alphabet)
        if n == 1:
            xt, yt, at, bt = xt[0], yt[0], at[0], bt[0]
        marg[(xt, yt)] = marg.get((xt, yt), ZERO) + value
        cond.setdefault((xt, yt), {})[(at, bt)] = value
    table: dict[tuple, dict[tuple, Fraction]] = {}
    uniform_row = None
    for xt in repeated.inputs_x:
        for yt in repeated.inputs_y:
            if (xt, yt) in cond:
                total = marg[(xt, yt)]
                table[(xt, yt)] = {
                    ab: v / total for ab, v in cond[(xt, yt)].items()
                }
            else:
                if uniform_row is None:
                    n_out = len(repeated.outputs_a) * len(repeated.outputs_b)
                    uniform_row = {
                        (at, bt): Fraction(1, n_out)
                        for at in repeated.outputs_a
                        for bt in repeated.outputs_b
                    }
                table[(xt, yt)] = uniform_row
    return Strategy(table)


@dataclass(frozen=True)
class BoundRow:
    descriptor: object
    fidelity_sq: IntervalScalar
    predicate_weight: Fraction  # <V, pi_t>^n (parallel) or <V^(x)n, pi_k> (sequential)


@dataclass(frozen=True)
class BoundReport:
    mode: str
    n: int
    bound: IntervalScalar
    winning: Fraction
    alpha_certified: Fraction  # max per-class tight ratio, used in the bound
    prefactor_certified: IntervalScalar  # N * alpha_certified^2
    prefactor_analytic: IntervalScalar  # N * alpha(n)^2 from the closed form
    degree: int
    rows: tuple[BoundRow, ...]


def definetti_upper_bound(
    game: Game,
    n: int,
    strategy: Strategy,
    mode: str = "parallel",
    kernel: Optional[SequentialKernel] = None,
    bits: int = DEFAULT_BITS,
    cap: int = DEFAULT_ENUM_CAP,
) -> BoundReport:
    """Certified upper bound on the winning probability of an invariant strategy.

    Evaluates N * alpha^2 * sum_k (1/N) F(W, pi_k)^2 <V, pi_k> with W the
    played joint weight, using the exact max per-class ratio as alpha so the
    bound is a true upper bound at every n; the closed-form analytic
    pre-factor and its polynomial degree are reported alongside.
    """
    if mode == "parallel":
        repeated = parallel_game(game, n, cap)
        relation: Relation = EXCHANGEABLE
    elif mode == "sequential":
        if kernel is None:
            raise BadParams("sequential mode needs a kernel")
        repeated = sequential_game(game, kernel, n, cap)
        relation = MARKOV
    else:
        raise BadParams(f"unknown mode {mode!r}")

    alphabet = _round_alphabet(game)
    w = joint_weight(game, repeated, strategy, n)
    check_exchangeable(w, relation, cap)  # raises NotExchangeable with witness

    index = enumerate_types(relation, alphabet, n, cap)
    descriptors = index.descriptors()
    sizes = [size for _, size in index.items]
    reps = [representative(d, n) for d in descriptors]
    w_values = [w(rep) for rep in reps]

    predicate_letters = frozenset(
        alphabet.pack(
            (
                game.inputs_x.index(x),
                game.inputs_y.index(y),
                game.outputs_a.index(a),
                game.outputs_b.index(b),
            )
        )
        for (x, y, a, b) in game.predicate
    )

    rows = []
    bound = IntervalScalar.exact(0, bits)
    for k, descr in enumerate(descriptors):
        pi_at_reps = [pi_value(descr, rep, n) for rep in reps]
        fid = fidelity_sq_from_pairs(
            [(wv * pv, size) for wv, pv, size in zip(w_values, pi_at_reps, sizes)],
            bits,
        )
        if isinstance(relation, Exchangeable):
            single = sum(
                (Fraction(descr.counts[z], n) for z in predicate_letters), ZERO
            )
            weight = single**n
        else:
            if len(predicate_letters) ** n > cap:
                raise CapExceeded("predicate power too large for the sequential bound")
            weight = sum(
                (
                    pi_value(descr, word, n)
                    for word in itertools.product(sorted(predicate_letters), repeat=n)
                ),
                ZERO,
            )
        rows.append(BoundRow(descr, fid, weight))
        if weight:
            bound = bound + fid * weight

    alpha_cert = max(alpha_tight(d, n) for d in descriptors)
    bound = bound * (alpha_cert * alpha_cert)
    analytic = alpha_analytic(relation, n, alphabet, bits)
    return BoundReport(
        mode=mode,
        n=n,
        bound=bound,
        winning=winning_probability(repeated, strategy),
        alpha_certified=alpha_cert,
        prefactor_certified=IntervalScalar.exact(
            index.N * alpha_cert * alpha_cert, bits
        ),
        prefactor_analytic=analytic.squared * index.N,
        degree=analytic.degree,
        rows=tuple(rows),
    )


def tensor_strategy(game: Game, strategy: Strategy, n: int) -> Strategy:
    """Play the same single-round strategy independently in every round."""
    if n == 1:
        return strategy
    table: dict[tuple, dict[tuple, Fraction]] = {}
    for xt in itertools.product(game.inputs_x, repeat=n):
        for yt in itertools.product(game.inputs_y, repeat=n):
            row: dict[tuple, Fraction] = {}
            rounds = [strategy.table[(x, y)] for x, y in zip(xt, yt)]
            for combo in itertools.product(*(r.items() for r in rounds)):
                value = ONE
                for _, p in combo:
                    value *= p
                if value:
                    at = tuple(ab[0] for ab, _ in combo)
                    bt = tuple(ab[1] for ab, _ in combo)
                    row[(at, bt)] = row.get((at, bt), ZERO) + value
            table[(xt, yt)] = row
    return Strategy(table)


def chsh_game() -> Game:
    """CHSH: uniform inputs on {0,1}^2, win iff a xor b == x and y."""
    quarter = Fraction(1, 4)
    law = {(x, y): quarter for x in (0, 1) for y in (0, 1)}
    predicate = frozenset(
        (x, y, a, b)
        for x in (0, 1)
        for y in (0, 1)
        for a in (0, 1)
        for b in (0, 1)
        if (a ^ b) == (x & y)
    )
    return Game((0, 1), (0, 1), (0, 1), (0, 1), law, predicate)
