"""Cospan composition, tensoring, squares, companions, and iso search."""

import pytest

from opencospan import (
    EMPTY,
    BoundaryError,
    BudgetExceeded,
    ComposabilityError,
    DecoratedCospan,
    FinFunction,
    FinSet,
    Graph,
    KindError,
    LabeledGraph,
    NotInImageOfL,
    StructuredCospan,
    SystemMorphism,
    TwoMorphism,
    check_companion,
    check_conjoint,
    companion,
    conjoint,
    cospan_iso,
    discrete,
    hcompose,
    hcompose_cells,
    identity_cospan,
    left_unitor,
    match_cells,
    relabel,
    reverse,
    right_unitor,
    tensor,
    to_decorated,
    to_structured,
    unit_cell,
    vcompose,
)
from opencospan.systems import decoration_theory
from opencospan.laws import intro_open_graph, sir_halves, sir_open_net


def fn(table, cod):
    return FinFunction(FinSet(len(table)), FinSet(cod), tuple(table))


def open_edge():
    """One directed edge with each endpoint exposed on its own side."""
    nodes = FinSet(2)
    graph = Graph(nodes, FinSet(1), fn([0], 2), fn([1], 2))
    return DecoratedCospan(FinSet(1), FinSet(1), fn([0], 2), fn([1], 2), graph)


def open_loop():
    graph = Graph(FinSet(1), FinSet(1), fn([0], 1), fn([0], 1))
    return DecoratedCospan(FinSet(1), FinSet(1), fn([0], 1), fn([0], 1), graph)


# -- composition and tensor -------------------------------------------------------


def test_composing_two_edges_builds_a_path():
    path = hcompose(open_edge(), open_edge())
    assert path.apex == FinSet(3)
    assert path.decoration.src.table == (0, 1)
    assert path.decoration.tgt.table == (1, 2)
    assert path.leg_left.table == (0,) and path.leg_right.table == (2,)


def test_composition_needs_matching_feet_and_kinds():
    wide = DecoratedCospan(
        FinSet(1), FinSet(2), fn([0], 2), fn([0, 1], 2), discrete("graph", FinSet(2))
    )
    with pytest.raises(ComposabilityError):
        hcompose(wide, open_edge())
    petri_unit = identity_cospan("petri", FinSet(1))
    with pytest.raises(KindError):
        hcompose(open_edge(), petri_unit)
    with pytest.raises(ComposabilityError):
        hcompose(open_edge(), to_structured(open_edge()))


def test_recomposing_the_split_epidemic_net():
    left, right = sir_halves()
    rebuilt = hcompose(left, right)
    whole = sir_open_net()
    witness = cospan_iso(rebuilt, whole)
    assert witness is not None
    h = witness.node_map
    assert h.is_bijection()
    # legs are carried, the decoration is carried, cellwise
    assert tuple(h.table[y] for y in rebuilt.leg_left.table) == tuple(whole.leg_left.table)
    assert tuple(h.table[y] for y in rebuilt.leg_right.table) == tuple(whole.leg_right.table)
    moved = relabel(h, rebuilt.decoration)
    theory = decoration_theory("petri_rates")
    assert theory.fiber_violations(moved, whole.decoration, witness.cell_map) == []


def test_unit_cospans_absorb_under_composition_up_to_iso():
    m = intro_open_graph()
    left = hcompose(identity_cospan("graph", m.foot_left), m)
    right = hcompose(m, identity_cospan("graph", m.foot_right))
    assert cospan_iso(left, m) is not None
    assert cospan_iso(right, m) is not None


def test_unit_absorption_is_not_on_the_nose():
    # the left leg avoids node 0, so gluing the unit in renumbers the apex
    graph = Graph(FinSet(2), FinSet(1), fn([0], 2), fn([1], 2))
    shifted = DecoratedCospan(FinSet(1), FinSet(1), fn([1], 2), fn([0], 2), graph)
    composite = hcompose(identity_cospan("graph", FinSet(1)), shifted)
    assert composite != shifted
    assert cospan_iso(composite, shifted) is not None


def test_unitor_cells_are_iso_squares():
    m = intro_open_graph()
    for cell, composite in (
        (left_unitor(m), hcompose(identity_cospan("graph", m.foot_left), m)),
        (right_unitor(m), hcompose(m, identity_cospan("graph", m.foot_right))),
    ):
        assert cell.src == composite and cell.tgt == m
        assert cell.violations() == []
        assert cell.apex_map.is_bijection()


def test_associativity_holds_up_to_iso():
    a, b, c = open_edge(), open_edge(), open_edge()
    lhs = hcompose(hcompose(a, b), c)
    rhs = hcompose(a, hcompose(b, c))
    assert cospan_iso(lhs, rhs) is not None


def test_tensor_adds_feet_and_concatenates_structure():
    m, n = open_edge(), open_loop()
    both = tensor(m, n)
    assert both.foot_left == FinSet(m.foot_left.size + n.foot_left.size)
    assert both.foot_right == FinSet(2)
    assert both.apex == FinSet(m.apex.size + n.apex.size)
    assert both.decoration.src.table == (0, 2)
    assert both.leg_left.table == (0, 2)


def test_tensor_symmetry_via_the_block_swap():
    m, n = open_edge(), open_loop()
    mn, nm = tensor(m, n), tensor(n, m)
    swap_apex = fn([1, 2, 0], 3)  # m's two nodes after n's one
    swap_l = fn([1, 0], 2)
    assert tuple(swap_apex.table[y] for y in mn.leg_left.table) == tuple(
        nm.leg_left.table[x] for x in swap_l.table
    )
    moved = relabel(swap_apex, mn.decoration)
    k = match_cells(moved, nm.decoration, FinFunction.identity(FinSet(3)))
    assert k is not None
    assert decoration_theory("graph").fiber_violations(moved, nm.decoration, k) == []


# -- squares -----------------------------------------------------------------------


def test_unit_cell_is_a_valid_square():
    f = fn([0, 0], 1)
    cell = unit_cell(f, "graph")
    assert cell.violations() == []
    ident = TwoMorphism.identity(open_edge())
    assert ident.violations() == []


def test_vertical_composition_runs_first_then_second():
    f, g = fn([0, 0], 1), fn([0], 1)
    stacked = vcompose(unit_cell(f, "graph"), unit_cell(g, "graph"))
    assert stacked.apex_map.table == (0, 0)
    assert stacked.src == identity_cospan("graph", FinSet(2))
    assert stacked.tgt == identity_cospan("graph", FinSet(1))
    with pytest.raises(BoundaryError):
        vcompose(unit_cell(f, "graph"), unit_cell(f, "graph"))


def test_pasting_squares_respects_the_boundary():
    m = open_edge()
    ident = TwoMorphism.identity(m)
    pasted = hcompose_cells(ident, ident)
    assert pasted.src == hcompose(m, m) == pasted.tgt
    assert pasted.violations() == []
    src_po_left = fn([0, 1], 3)
    # restricting the pasted apex map along the left injection recovers the
    # left component
    assert tuple(pasted.apex_map.table[y] for y in src_po_left.table) == (0, 1)


def test_pasting_inconsistent_squares_fails_loudly():
    apex = discrete("graph", FinSet(2))
    m = DecoratedCospan(FinSet(1), FinSet(1), fn([0], 2), fn([1], 2), apex)
    good = TwoMorphism.identity(m)
    twisted = TwoMorphism(
        m, m, FinFunction.identity(FinSet(1)), FinFunction.identity(FinSet(1)),
        fn([1, 0], 2), FinFunction.identity(EMPTY),
    )
    assert twisted.violations() != []  # its legs do not commute
    with pytest.raises(BoundaryError):
        hcompose_cells(good, twisted)
    wide = TwoMorphism.identity(identity_cospan("graph", FinSet(2)))
    with pytest.raises(BoundaryError):
        hcompose_cells(good, wide)  # foot maps do not meet
    with pytest.raises(BoundaryError):
        vcompose(good, wide)


def test_square_validation_catches_label_breakage():
    inner = Graph(FinSet(1), FinSet(1), fn([0], 1), fn([0], 1))
    a = DecoratedCospan(EMPTY, EMPTY, fn([], 1), fn([], 1), LabeledGraph(inner, ("x",)))
    b = DecoratedCospan(EMPTY, EMPTY, fn([], 1), fn([], 1), LabeledGraph(inner, ("y",)))
    cell = TwoMorphism(
        a, b, FinFunction.identity(EMPTY), FinFunction.identity(EMPTY),
        FinFunction.identity(FinSet(1)), FinFunction.identity(FinSet(1)),
    )
    assert any("label" in v for v in cell.violations())


# -- companions and conjoints --------------------------------------------------------


def test_companion_of_identity_is_the_unit_cospan():
    ident = FinFunction.identity(FinSet(2))
    pair = companion(ident, "graph")
    assert pair.cospan == identity_cospan("graph", FinSet(2))


def test_companion_equations_hold_for_sample_functions():
    for table, cod in ([(0, 0), 1], [(1, 0, 2), 3], [(), 2]):
        f = fn(list(table), cod)
        for representation in ("decorated", "structured"):
            ok, why = check_companion(f, "graph", representation)
            assert ok, why
            ok, why = check_conjoint(f, "graph", representation)
            assert ok, why


def test_conjoint_is_the_reversed_companion():
    f = fn([0, 0, 1], 2)
    assert conjoint(f, "petri").cospan == reverse(companion(f, "petri").cospan)


def test_reverse_is_an_involution():
    m = intro_open_graph()
    assert reverse(reverse(m)) == m
    assert reverse(m).foot_left == m.foot_right
    s = to_structured(m)
    assert reverse(reverse(s)) == s


# -- conversion --------------------------------------------------------------------


def test_conversion_roundtrips_on_the_nose():
    for m in (sir_open_net(), intro_open_graph(), open_edge()):
        assert to_decorated(to_structured(m)) == m


def test_structured_composition_matches_decorated_composition():
    left, right = sir_halves()
    assert to_structured(hcompose(left, right)) == hcompose(
        to_structured(left), to_structured(right)
    )
    assert to_structured(tensor(left, right)) == tensor(
        to_structured(left), to_structured(right)
    )


def test_structured_feet_must_be_discrete_to_convert_back():
    loop = Graph(FinSet(1), FinSet(1), fn([0], 1), fn([0], 1))
    leg = SystemMorphism.identity(loop)
    cospan = StructuredCospan(leg, leg)
    assert any("not discrete" in v for v in cospan.violations())
    with pytest.raises(NotInImageOfL):
        to_decorated(cospan)


def test_structured_unit_and_feet_accessors():
    unit = identity_cospan("lgraph", FinSet(2), representation="structured")
    assert isinstance(unit, StructuredCospan)
    assert unit.foot_left == unit.foot_right == FinSet(2)
    assert unit.violations() == []
    assert to_structured(to_decorated(unit)) == unit


# -- isomorphism decisions ------------------------------------------------------------


def permuted(m: DecoratedCospan, sigma: FinFunction) -> DecoratedCospan:
    from opencospan import compose

    return DecoratedCospan(
        m.foot_left,
        m.foot_right,
        compose(sigma, m.leg_left),
        compose(sigma, m.leg_right),
        relabel(sigma, m.decoration),
    )


def test_cospan_iso_recovers_a_permutation():
    m = sir_open_net()
    sigma = fn([2, 0, 1], 3)
    witness = cospan_iso(m, permuted(m, sigma))
    assert witness is not None and witness.node_map == sigma


def test_cospan_iso_rejects_structural_mismatches():
    m = intro_open_graph()
    extra = Graph(FinSet(4), FinSet(6), fn([0, 0, 1, 2, 1, 3], 4), fn([1, 2, 3, 3, 2, 3], 4))
    n = DecoratedCospan(m.foot_left, m.foot_right, m.leg_left, m.leg_right, extra)
    assert cospan_iso(m, n) is None  # different edge counts
    # node 3 has no outgoing edges, so no iso can swap the two exposed ends
    assert cospan_iso(m, reverse(m)) is None
    assert cospan_iso(m, to_structured(m)) is None  # different species


def test_cospan_iso_distinguishes_rates():
    m = sir_open_net()
    slower = DecoratedCospan(
        m.foot_left,
        m.foot_right,
        m.leg_left,
        m.leg_right,
        type(m.decoration)(m.decoration.net, (0.3, 0.2)),
    )
    assert cospan_iso(m, slower) is None


def test_cospan_iso_budget_is_charged_per_assignment():
    free = DecoratedCospan(EMPTY, EMPTY, fn([], 3), fn([], 3), discrete("graph", FinSet(3)))
    with pytest.raises(BudgetExceeded):
        cospan_iso(free, free, budget=1)
    assert cospan_iso(free, free, budget=100) is not None


def test_match_cells_pairs_parallel_edges_in_order():
    double = Graph(FinSet(2), FinSet(2), fn([0, 0], 2), fn([1, 1], 2))
    k = match_cells(double, double, FinFunction.identity(FinSet(2)))
    assert k == FinFunction.identity(FinSet(2))
