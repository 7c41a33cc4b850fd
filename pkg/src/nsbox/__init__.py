"""Exact nonsignaling correlation tables: construction, classification,
convex decomposition, and PR-box interconversion."""

from .errors import BudgetExceeded, FormatError, NsboxError, ShapeError, SignalingError, SpecError
from .core import (
    CorrelationTable,
    LocalRelabeling,
    Scenario,
    apply_relabeling,
    canonical_form,
    deterministic_table,
    equivalent,
    is_nonsignaling,
    marginals,
    mix,
    uniform_table,
    validate,
)
from .polytope import (
    ConvexDecomposition,
    caratheodory_decompose,
    enumerate_vertices,
    is_extremal,
    is_local,
)
from .catalog import (
    PR_SPEC,
    BarrettSpec,
    ExtremalSpec,
    barrett_box,
    enumerate_classes,
    enumerate_specs,
    from_xor_characterization,
    identify_spec,
    pr_box,
    table2_box,
    table_iii,
)
from .appendix import (
    OneZeroForm,
    SplitStep,
    chain_split,
    decompose_to_table2,
    marginal_bounds,
    one_zero_normalize,
    witness_extremal,
    zero_cell_split,
)
from .gf2 import FactoredForm, Gf2Polynomial, factor, multilinear_of
from .interconversion import (
    box_count,
    correlation_function,
    extract_pr,
    simulate_exact,
    simulate_mixture,
    simulate_sampled,
    simulate_table,
)
from .quantum import QuantumScenario, born_table, chsh_value, preset, quantum_to_prbox_report

__version__ = "0.1.0"
