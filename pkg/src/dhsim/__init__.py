"""Heisenberg-picture descriptor simulator for n-qubit gate networks.

Evolves per-qubit operator triples under a gate circuit, reconstructs
global and reduced density matrices from descriptor products plus a
fixed initial state, cross-validates against an independent
state-vector simulator, and audits circuits for parameter dependence,
contiguity, and locally (in)accessible information.
"""

from .circuit import (
    BoundCircuit,
    BoundGate,
    Circuit,
    Gate,
    ParamRef,
    bind,
    build_bell_experiment,
    build_partial_teleportation,
    build_superdense,
    build_teleportation,
    parse,
    serialize,
)
from .descriptors import (
    Descriptor,
    NetworkState,
    RewriteTable,
    apply_gate,
    build_rewrite_table,
    evolve,
    evolve_observable,
    gamma_product,
    init_network,
)
from .errors import (
    BindingError,
    BudgetError,
    DhError,
    GaugeError,
    InvariantError,
    ParseError,
    SizeMismatchError,
)
from .infoflow import (
    DependenceVerdict,
    PastCone,
    classify_information,
    contiguity_audit,
    depends_descriptor,
    depends_global,
    depends_reduced,
    descriptor_distance,
    past_cone,
)
from .pauli import (
    PauliString,
    PauliSum,
    decompose,
    hs_inner,
    mul_letters,
    mul_strings,
    sum_add,
    sum_mul,
    sum_scale,
    to_dense,
)
from .reconstruct import (
    InitialState,
    expectation_of_product,
    expectation_table,
    gauge_transform,
    global_density,
    local_expectation,
    reduced_density,
)
from .statevector import (
    DensityMatrix,
    StateVector,
    density,
    evolve_state,
    measurement_distribution,
    partial_trace,
    state_fidelity,
    trace_distance,
)

__all__ = [
    "BindingError",
    "BoundCircuit",
    "BoundGate",
    "BudgetError",
    "Circuit",
    "DensityMatrix",
    "DependenceVerdict",
    "Descriptor",
    "DhError",
    "Gate",
    "GaugeError",
    "InitialState",
    "InvariantError",
    "NetworkState",
    "ParamRef",
    "ParseError",
    "PastCone",
    "PauliString",
    "PauliSum",
    "RewriteTable",
    "SizeMismatchError",
    "StateVector",
    "apply_gate",
    "bind",
    "build_bell_experiment",
    "build_partial_teleportation",
    "build_rewrite_table",
    "build_superdense",
    "build_teleportation",
    "classify_information",
    "contiguity_audit",
    "decompose",
    "density",
    "depends_descriptor",
    "depends_global",
    "depends_reduced",
    "descriptor_distance",
    "evolve",
    "evolve_observable",
    "evolve_state",
    "expectation_of_product",
    "expectation_table",
    "gamma_product",
    "gauge_transform",
    "global_density",
    "hs_inner",
    "init_network",
    "local_expectation",
    "measurement_distribution",
    "mul_letters",
    "mul_strings",
    "parse",
    "partial_trace",
    "past_cone",
    "reduced_density",
    "serialize",
    "state_fidelity",
    "sum_add",
    "sum_mul",
    "sum_scale",
    "to_dense",
    "trace_distance",
]

__version__ = "0.1.0"
