"""Exact de Finetti reductions for partially exchangeable distributions."""

from .core import (
    Alphabet,
    ConditionalDistribution,
    FiniteDistribution,
    Verdict,
    Word,
    dirac,
    make_distribution,
    marginal,
    pointwise_dominates,
    tensor_power,
    uniform,
)
from .intervals import IntervalScalar
from .relations import (
    EXCHANGEABLE,
    MARKOV,
    ClassIndex,
    Exchangeable,
    ExchangeableType,
    LMarkov,
    LMarkovType,
    Markov,
    MarkovType,
    ProductRelation,
    ProductType,
    class_members,
    class_size,
    enumerate_types,
    is_nonempty,
    type_of,
)
from .reduction import (
    AlphaBound,
    ReductionCertificate,
    alpha_analytic,
    alpha_tight,
    decompose,
    empirical_pi,
    fidelity_squared,
    stirling_bounds,
    uniform_class_dist,
    verify_flexible_reduction,
)

__version__ = "0.1.0"

from .conditional import (
    ConditionalCertificate,
    condition,
    empirical_alpha_prime,
    lift_conditional,
    marginal_type,
    markov_marginal_counterexample,
    verify_conditional_reduction,
)
from .games import (
    Game,
    SequentialKernel,
    Strategy,
    chsh_game,
    classical_value,
    definetti_upper_bound,
    parallel_game,
    sequential_game,
    symmetrize_strategy,
    winning_probability,
)
from .graphs import (
    DirectedMultigraph,
    arborescence_count,
    eulerian_trajectory_count_bruteforce,
    is_eulerian,
    transition_graph,
)
from .mp import LambdaMatrix, beta_bound, dirichlet_moment, lambda_matrix, mp_of_extreme
