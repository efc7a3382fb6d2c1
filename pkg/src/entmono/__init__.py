"""Bipartite entanglement measures and monogamy/polygamy checks for finite-dimensional states."""

from .entropy import (
    EntropyKind,
    binary_entropy,
    linear_entropy,
    purity,
    renyi,
    shannon_bits,
    tsallis,
    von_neumann,
)
from .monogamy import (
    MonogamyReport,
    ckw_check_mixed,
    ckw_check_pure,
    n_qubit_monogamy,
    polygamy_tangle,
    polygamy_vn,
    qudit_monogamy,
    tau1,
    tau2,
    violation_search,
)
from .qcore import (
    Bipartition,
    DensityOperator,
    PureState,
    StateError,
    WitnessOperator,
    as_density,
    ginibre_random_density,
    group,
    haar_random_pure,
    load_state,
    partial_trace,
    permute,
    psd_sqrt,
    purify,
    save_state,
    state_from_dict,
    state_to_dict,
    tensor_product,
)
from .roof import (
    ENTROPY,
    TANGLE,
    Ensemble,
    PureMeasure,
    RoofConfig,
    RoofResult,
    assisted_entanglement,
    entanglement_of_formation,
    roof_maximize,
    roof_minimize,
    tangle_of_assistance,
)
from .squashed import (
    SquashedBound,
    chain_rule_check,
    cmi,
    squashed_monogamy_diag,
    squashed_upper_bound,
    superadditivity_diag,
)
from .states import antisymmetric_state, basis_state, bell, ghz, w_class, w_state
from .tangle import (
    TangleValue,
    concurrence,
    eof_from_concurrence,
    eof_two_qubit,
    pure_tangle,
    two_qubit_tangle,
)

__version__ = "0.1.0"
