"""Open systems as composable cospans, with mass-action semantics.

Finite sets with chosen colimits sit at the bottom; graphs, labeled
graphs, and Petri nets (with or without rates) sit over them as
decorations; cospans glue such systems end to end and side by side; and
rated open nets gray-box into simulable open polynomial dynamics.
"""

from .errors import (
    BoundaryError,
    BudgetExceeded,
    ComposabilityError,
    CompositionError,
    DimensionError,
    DivergenceError,
    KindError,
    ModelFormatError,
    ModelValidationError,
    MorphismShapeError,
    NotInImageOfL,
    OpenCospanError,
    SpanError,
    UnsupportedGluing,
)
from .finset import (
    DEFAULT_ISO_BUDGET,
    EMPTY,
    FinFunction,
    FinSet,
    ISO_BUDGET_ENV,
    PushoutResult,
    compose,
    coproduct,
    coproduct_map,
    copair,
    find_iso,
    pushout,
)
from .systems import (
    DecorationTheory,
    Graph,
    LabeledGraph,
    Multiset,
    PetriNet,
    PetriNetWithRates,
    System,
    SystemMorphism,
    cells_of,
    compose_morphism,
    decoration_theory,
    discrete,
    interface_of,
    is_discrete,
    relabel,
    system_coproduct,
    system_pushout,
    validate_morphism,
)
from .cospans import (
    AdjointPair,
    Cospan,
    DecoratedCospan,
    IsoWitness,
    StructuredCospan,
    TwoMorphism,
    check_companion,
    check_conjoint,
    companion,
    conjoint,
    cospan_iso,
    hcompose,
    hcompose_cells,
    identity_cospan,
    left_unitor,
    match_cells,
    representation_of,
    reverse,
    right_unitor,
    tensor,
    to_decorated,
    to_structured,
    unit_cell,
    vcompose,
)
from .dynamics import (
    FlowSchedule,
    OpenDynam,
    PiecewiseConstant,
    Poly,
    PolyVectorField,
    admits_morphism_from_empty,
    compose_open_dynam,
    field_close,
    graybox,
    mass_action,
    open_dynam_iso,
    open_rate_rhs,
    poly_add,
    poly_close,
    pushforward_field,
    simulate,
)
from .modelio import (
    ModelFile,
    Names,
    SimConfig,
    canonical_json,
    default_names,
    load_model,
    load_sim_config,
    model_from_json,
    resolve_simulation,
    save_model,
    sim_config_from_json,
    trajectory_to_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointPair",
    "BoundaryError",
    "BudgetExceeded",
    "ComposabilityError",
    "CompositionError",
    "Cospan",
    "DEFAULT_ISO_BUDGET",
    "DecoratedCospan",
    "DecorationTheory",
    "DimensionError",
    "DivergenceError",
    "EMPTY",
    "FinFunction",
    "FinSet",
    "FlowSchedule",
    "Graph",
    "ISO_BUDGET_ENV",
    "IsoWitness",
    "KindError",
    "LabeledGraph",
    "ModelFile",
    "ModelFormatError",
    "ModelValidationError",
    "MorphismShapeError",
    "Multiset",
    "Names",
    "NotInImageOfL",
    "OpenCospanError",
    "OpenDynam",
    "PetriNet",
    "PetriNetWithRates",
    "PiecewiseConstant",
    "Poly",
    "PolyVectorField",
    "PushoutResult",
    "SimConfig",
    "SpanError",
    "StructuredCospan",
    "System",
    "SystemMorphism",
    "TwoMorphism",
    "UnsupportedGluing",
    "admits_morphism_from_empty",
    "canonical_json",
    "cells_of",
    "check_companion",
    "check_conjoint",
    "companion",
    "compose",
    "compose_morphism",
    "compose_open_dynam",
    "conjoint",
    "copair",
    "coproduct",
    "coproduct_map",
    "cospan_iso",
    "decoration_theory",
    "default_names",
    "discrete",
    "field_close",
    "find_iso",
    "graybox",
    "hcompose",
    "hcompose_cells",
    "identity_cospan",
    "interface_of",
    "is_discrete",
    "left_unitor",
    "load_model",
    "load_sim_config",
    "mass_action",
    "match_cells",
    "model_from_json",
    "open_dynam_iso",
    "open_rate_rhs",
    "poly_add",
    "poly_close",
    "pushforward_field",
    "pushout",
    "relabel",
    "representation_of",
    "resolve_simulation",
    "reverse",
    "right_unitor",
    "save_model",
    "sim_config_from_json",
    "simulate",
    "system_coproduct",
    "system_pushout",
    "tensor",
    "to_decorated",
    "to_structured",
    "trajectory_to_csv",
    "unit_cell",
    "validate_morphism",
    "vcompose",
]
