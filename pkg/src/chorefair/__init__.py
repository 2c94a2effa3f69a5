"""Fair division of chores with dubious-chore augmentation."""

from .core import (
    AlgorithmBugError,
    Allocation,
    AugmentedView,
    BudgetExceededError,
    DubiousAllocation,
    EMPTY_WITNESS,
    EnvyReport,
    Instance,
    InvalidInputError,
    PriceVector,
    ValuationClass,
    Variant,
    check_def_witness,
    classify_valuations,
    envy_matrix,
    is_ef,
    is_ef1,
    is_fisher_equilibrium,
    is_pareto_optimal,
    is_pef1,
    mpb_set,
)
from .algorithms import (
    EquilibriumResult,
    RoundRobinTrace,
    augment_from_equilibrium,
    binary_def_po,
    envy_graph,
    find_pef1_equilibrium,
    round_robin,
    rr_augmentation,
    two_types_def_po,
)
from .solver import (
    SolveResult,
    is_def_k,
    min_cover_for_target,
    min_dubious,
    min_dubious_bruteforce,
    min_over_allocations,
)
from .generators import (
    SyntheticConfig,
    gen_from_partition,
    gen_from_rx3c,
    gen_from_setsplitting,
    gen_synthetic,
    read_allocation,
    read_instance,
    read_witness,
    write_allocation,
    write_instance,
    write_witness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
