"""Partial-exchangeability relations, type descriptors and class enumeration.

Four relation variants are supported on words in V^n:

* exchangeable      -- words are equivalent iff their letter counts agree;
* Markov            -- equal first letter and equal transition-pair counts;
* l-Markov          -- equal first l letters and equal (l+1)-gram counts;
* Cartesian product -- component-wise equivalence on a factored alphabet.

A class is identified by its type descriptor (counts / start + transition
matrix / start gram + transition tensor / tuple of factor descriptors).
Cardinalities come from closed formulas: the multinomial coefficient for
exchangeability and the BEST-theorem trajectory count for the Markov family.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Union

from .core import Alphabet, Word, DEFAULT_ENUM_CAP, project_word
from .errors import CapExceeded, EmptyClass, InconsistentDescriptor, WordTooShort
from .graphs import trajectory_count, transition_graph


# -- relation variants --------------------------------------------------------


@dataclass(frozen=True)
class Exchangeable:
    pass


@dataclass(frozen=True)
class Markov:
    pass


@dataclass(frozen=True)
class LMarkov:
    ell: int

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError("l-Markov order must be >= 1")


@dataclass(frozen=True)
class ProductRelation:
    parts: tuple["Relation", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))
        if any(isinstance(p, ProductRelation) for p in self.parts):
            raise ValueError("product relations do not nest; flatten the factors")


Relation = Union[Exchangeable, Markov, LMarkov, ProductRelation]

EXCHANGEABLE = Exchangeable()
MARKOV = Markov()


def min_word_length(relation: Relation) -> int:
    if isinstance(relation, LMarkov):
        return relation.ell + 1
    if isinstance(relation, ProductRelation):
        return max(min_word_length(p) for p in relation.parts)
    return 1


# -- type descriptors ----------------------------------------------------------


@dataclass(frozen=True)
class ExchangeableType:
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", tuple(self.counts))
        if any(c < 0 for c in self.counts):
            raise InconsistentDescriptor("negative letter count")


@dataclass(frozen=True)
class MarkovType:
    start: int
    trans: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        trans = tuple(tuple(row) for row in self.trans)
        object.__setattr__(self, "trans", trans)
        d = len(trans)
        if any(len(row) != d for row in trans):
            raise InconsistentDescriptor("transition matrix must be square")
        if any(x < 0 for row in trans for x in row):
            raise InconsistentDescriptor("negative transition count")
        if not 0 <= self.start < d:
            raise InconsistentDescriptor("start letter out of range")

    def row_sums(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.trans)


@dataclass(frozen=True)
class LMarkovType:
    """Start gram of length l plus gram -> next-letter counts.

    Rows of ``trans`` are indexed by the row-major rank of the gram
    (i_1..i_l); columns by the following letter.
    """

    ell: int
    start: tuple[int, ...]
    trans: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", tuple(self.start))
        trans = tuple(tuple(row) for row in self.trans)
        object.__setattr__(self, "trans", trans)
        if self.ell < 1 or len(self.start) != self.ell:
            raise InconsistentDescriptor("start gram length must equal l")
        d = len(trans[0]) if trans else 0
        if len(trans) != d**self.ell or any(len(row) != d for row in trans):
            raise InconsistentDescriptor("tensor must have d^l rows of width d")
        if any(x < 0 for row in trans for x in row):
            raise InconsistentDescriptor("negative transition count")
        if any(not 0 <= v < d for v in self.start):
            raise InconsistentDescriptor("start gram letter out of range")


@dataclass(frozen=True)
class ProductType:
    parts: tuple["TypeDescriptor", ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "parts", tuple(self.parts))


TypeDescriptor = Union[ExchangeableType, MarkovType, LMarkovType, ProductType]


def sort_key(descriptor: TypeDescriptor):
    if isinstance(descriptor, ExchangeableType):
        return (0, descriptor.counts)
    if isinstance(descriptor, MarkovType):
        return (1, descriptor.start, descriptor.trans)
    if isinstance(descriptor, LMarkovType):
        return (2, descriptor.start, descriptor.trans)
    return (3, tuple(sort_key(p) for p in descriptor.parts))


def gram_rank(gram: tuple[int, ...], d: int) -> int:
    rank = 0
    for v in gram:
        rank = rank * d + v
    return rank


# -- typing words --------------------------------------------------------------


def type_of(word: Word, relation: Relation, alphabet: Alphabet) -> TypeDescriptor:
    """Descriptor of the class containing ``word``; equal descriptors are
    exactly the relation's equivalence."""
    word = tuple(word)
    n = len(word)
    alphabet.check_word(word, n)
    d = alphabet.size
    if isinstance(relation, Exchangeable):
        counts = [0] * d
        for letter in word:
            counts[letter] += 1
        return ExchangeableType(tuple(counts))
    if isinstance(relation, Markov):
        rows = [[0] * d for _ in range(d)]
        for a, b in zip(word, word[1:]):
            rows[a][b] += 1
        return MarkovType(word[0], tuple(tuple(r) for r in rows))
    if isinstance(relation, LMarkov):
        ell = relation.ell
        if n < ell + 1:
            raise WordTooShort(f"l-Markov({ell}) needs words of length >= {ell + 1}")
        rows = [[0] * d for _ in range(d**ell)]
        for i in range(n - ell):
            rows[gram_rank(word[i : i + ell], d)][word[i + ell]] += 1
        return LMarkovType(ell, word[:ell], tuple(tuple(r) for r in rows))
    if isinstance(relation, ProductRelation):
        factors = _factor_alphabets(relation, alphabet)
        parts = tuple(
            type_of(project_word(alphabet, word, i), rel, fa)
            for i, (rel, fa) in enumerate(zip(relation.parts, factors))
        )
        return ProductType(parts)
    raise TypeError(f"unknown relation {relation!r}")


def _factor_alphabets(relation: ProductRelation, alphabet: Alphabet) -> list[Alphabet]:
    if alphabet.factors is None:
        raise InconsistentDescriptor("product relation requires a factored alphabet")
    if len(alphabet.factors) != len(relation.parts):
        raise InconsistentDescriptor("product relation arity does not match factors")
    return [Alphabet(f) for f in alphabet.factors]


# -- nonemptiness and cardinality ----------------------------------------------


def is_nonempty(descriptor: TypeDescriptor, n: int) -> bool:
    """Whether some word of length n realizes the descriptor."""
    if isinstance(descriptor, ExchangeableType):
        if sum(descriptor.counts) != n:
            raise InconsistentDescriptor("letter counts do not sum to n")
        return True
    if isinstance(descriptor, (MarkovType, LMarkovType)):
        return trajectory_count(descriptor, n) > 0
    if isinstance(descriptor, ProductType):
        return all(is_nonempty(p, n) for p in descriptor.parts)
    raise TypeError(f"unknown descriptor {descriptor!r}")


def class_size(descriptor: TypeDescriptor, n: int) -> int:
    """Exact cardinality of the class; 0 when no word realizes the type.

    Multinomial n!/(t_1!...t_d!) for exchangeability, the BEST trajectory
    count on the (augmented) transition graph for the Markov family, and the
    product of factor sizes for Cartesian products.
    """
    if isinstance(descriptor, ExchangeableType):
        if sum(descriptor.counts) != n:
            raise InconsistentDescriptor("letter counts do not sum to n")
        size = math.factorial(n)
        for c in descriptor.counts:
            size //= math.factorial(c)
        return size
    if isinstance(descriptor, (MarkovType, LMarkovType)):
        return trajectory_count(descriptor, n)
    if isinstance(descriptor, ProductType):
        size = 1
        for part in descriptor.parts:
            size *= class_size(part, n)
        return size
    raise TypeError(f"unknown descriptor {descriptor!r}")


def best_formula_terms(descriptor: MarkovType, n: int) -> dict:
    """Factored BEST evaluation t_w * T(G_0) * prod(t_i - 1)!/prod t_ij!.

    Only defined when the end state has at least one outgoing transition
    (t_w >= 1), which is the shape quoted for the worked example.
    """
    g, start, end, aug = transition_graph(descriptor, n)
    t_w = g.outdeg(end)
    if t_w < 1:
        raise InconsistentDescriptor("factored form needs t_w >= 1")
    from .graphs import arborescence_count

    trees = arborescence_count(aug, start)
    ratio_num = 1
    for v in range(g.m):
        if g.outdeg(v) >= 1:
            ratio_num *= math.factorial(g.outdeg(v) - 1)
    ratio_den = 1
    for row in g.M:
        for mult in row:
            ratio_den *= math.factorial(mult)
    from fractions import Fraction

    return {
        "t_w": t_w,
        "spanning_trees": trees,
        "factorial_ratio": Fraction(ratio_num, ratio_den),
        "end_vertex": end,
        "size": class_size(descriptor, n),
    }


# -- member enumeration ---------------------------------------------------------


def _multiset_words(counts: tuple[int, ...]) -> Iterator[Word]:
    if sum(counts) == 0:
        yield ()
        return
    for letter, c in enumerate(counts):
        if c:
            rest = counts[:letter] + (c - 1,) + counts[letter + 1 :]
            for tail in _multiset_words(rest):
                yield (letter,) + tail


def class_members(
    descriptor: TypeDescriptor, n: int, cap: int = DEFAULT_ENUM_CAP
) -> list[Word]:
    """All words realizing the descriptor, in lexicographic order."""
    size = class_size(descriptor, n)
    if size > cap:
        raise CapExceeded(f"class of size {size} exceeds cap {cap}")
    if isinstance(descriptor, ExchangeableType):
        return list(_multiset_words(descriptor.counts))
    if isinstance(descriptor, MarkovType):
        if size == 0:
            return []
        from .graphs import eulerian_trajectories

        g, start, _, _ = transition_graph(descriptor, n)
        return [traj for traj in eulerian_trajectories(g, start)]
    if isinstance(descriptor, LMarkovType):
        if size == 0:
            return []
        from .graphs import eulerian_trajectories

        g, start, _, _ = transition_graph(descriptor, n)
        d = len(descriptor.trans[0])
        grams = list(itertools.product(range(d), repeat=descriptor.ell))
        words = []
        for traj in eulerian_trajectories(g, start):
            word = descriptor.start + tuple(grams[v][-1] for v in traj[1:])
            words.append(word)
        return sorted(words)
    if isinstance(descriptor, ProductType):
        factor_sizes = _product_factor_sizes(descriptor)
        alphabet = Alphabet(math.prod(factor_sizes), tuple(factor_sizes))
        member_lists = [class_members(p, n, cap) for p in descriptor.parts]
        words = [
            tuple(alphabet.pack(parts) for parts in zip(*combo))
            for combo in itertools.product(*member_lists)
        ]
        return sorted(words)
    raise TypeError(f"unknown descriptor {descriptor!r}")


def _product_factor_sizes(descriptor: ProductType) -> list[int]:
    sizes = []
    for part in descriptor.parts:
        if isinstance(part, ExchangeableType):
            sizes.append(len(part.counts))
        elif isinstance(part, MarkovType):
            sizes.append(len(part.trans))
        elif isinstance(part, LMarkovType):
            sizes.append(len(part.trans[0]))
        else:
            raise InconsistentDescriptor("nested product descriptors are not supported")
    return sizes


def representative(descriptor: TypeDescriptor, n: int) -> Word:
    """One member of the class (the lexicographically first for exchangeable
    and product types, the first trajectory otherwise)."""
    if isinstance(descriptor, ExchangeableType):
        word: Word = ()
        for letter, c in enumerate(descriptor.counts):
            word += (letter,) * c
        return word
    if isinstance(descriptor, (MarkovType, LMarkovType)):
        from .errors import NoValidEnd
        from .graphs import eulerian_trajectories

        try:
            g, start, _, _ = transition_graph(descriptor, n)
            traj = next(eulerian_trajectories(g, start))
        except (NoValidEnd, StopIteration):
            raise EmptyClass("empty class has no representative") from None
        if isinstance(descriptor, MarkovType):
            return traj
        d = len(descriptor.trans[0])
        grams = list(itertools.product(range(d), repeat=descriptor.ell))
        return descriptor.start + tuple(grams[v][-1] for v in traj[1:])
    if isinstance(descriptor, ProductType):
        factor_sizes = _product_factor_sizes(descriptor)
        alphabet = Alphabet(math.prod(factor_sizes), tuple(factor_sizes))
        reps = [representative(p, n) for p in descriptor.parts]
        return tuple(alphabet.pack(parts) for parts in zip(*reps))
    raise TypeError(f"unknown descriptor {descriptor!r}")


# -- class index -----------------------------------------------------------------


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """All tuples of ``parts`` nonnegative integers summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class ClassIndex:
    """The nonempty classes of a relation on V^n, with exact cardinalities."""

    relation: Relation
    alphabet: Alphabet
    n: int
    items: tuple[tuple[TypeDescriptor, int], ...]

    @property
    def N(self) -> int:
        return len(self.items)

    def descriptors(self) -> list[TypeDescriptor]:
        return [t for t, _ in self.items]

    def size_of(self, descriptor: TypeDescriptor) -> int:
        for t, s in self.items:
            if t == descriptor:
                return s
        raise KeyError(descriptor)


def enumerate_types(
    relation: Relation, alphabet: Alphabet, n: int, cap: int = DEFAULT_ENUM_CAP
) -> ClassIndex:
    """Index of exactly the nonempty classes; sizes sum to d^n by construction
    (verified, which doubles as a self-check of the cardinality formulas)."""
    if n < min_word_length(relation):
        raise WordTooShort(f"relation needs n >= {min_word_length(relation)}")
    d = alphabet.size
    items: list[tuple[TypeDescriptor, int]] = []
    if isinstance(relation, Exchangeable):
        for counts in compositions(n, d):
            items.append((ExchangeableType(counts), class_size(ExchangeableType(counts), n)))
    elif isinstance(relation, Markov):
        for start in range(d):
            for flat in compositions(n - 1, d * d):
                rows = tuple(tuple(flat[i * d : (i + 1) * d]) for i in range(d))
                descr = MarkovType(start, rows)
                size = class_size(descr, n)
                if size:
                    items.append((descr, size))
    elif isinstance(relation, LMarkov):
        ell = relation.ell
        for start in itertools.product(range(d), repeat=ell):
            for flat in compositions(n - ell, d**ell * d):
                rows = tuple(tuple(flat[i * d : (i + 1) * d]) for i in range(d**ell))
                descr = LMarkovType(ell, start, rows)
                size = class_size(descr, n)
                if size:
                    items.append((descr, size))
    elif isinstance(relation, ProductRelation):
        factors = _factor_alphabets(relation, alphabet)
        sub = [enumerate_types(rel, fa, n, cap) for rel, fa in zip(relation.parts, factors)]
        for combo in itertools.product(*(ix.items for ix in sub)):
            descr = ProductType(tuple(t for t, _ in combo))
            size = 1
            for _, s in combo:
                size *= s
            items.append((descr, size))
    else:
        raise TypeError(f"unknown relation {relation!r}")

    items.sort(key=lambda pair: sort_key(pair[0]))
    total = sum(s for _, s in items)
    if total != d**n:
        raise InconsistentDescriptor(
            f"class sizes sum to {total}, expected {d}^{n} = {d**n}"
        )
    return ClassIndex(relation, alphabet, n, tuple(items))


def brute_force_index(
    relation: Relation, alphabet: Alphabet, n: int, cap: int = DEFAULT_ENUM_CAP
) -> dict[TypeDescriptor, list[Word]]:
    """Oracle: group all d^n words by descriptor (for cross-checking formulas)."""
    groups: dict[TypeDescriptor, list[Word]] = {}
    for word in alphabet.words(n, cap):
        groups.setdefault(type_of(word, relation, alphabet), []).append(word)
    return groups
