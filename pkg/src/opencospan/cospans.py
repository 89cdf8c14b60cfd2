"""Open systems as cospans, glued end to end and tensored side by side.

Two interchangeable presentations are provided.  A `DecoratedCospan` is a
cospan of finite sets whose apex carries a system as decoration; a
`StructuredCospan` is a cospan of systems whose feet are structureless.
`to_structured` and `to_decorated` translate between them and are mutually
inverse; both translations preserve composition and tensor on the nose
because both presentations choose the same colimits.

Conventions: `hcompose(m, n)` glues m's right foot to n's left foot, so
composites read left to right.  `vcompose(a, b)` applies a first, then b.
Horizontal composition is associative and unital only up to isomorphism;
`cospan_iso` decides that equivalence and returns an explicit witness.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Union

from .errors import (
    BoundaryError,
    BudgetExceeded,
    ComposabilityError,
    KindError,
    NotInImageOfL,
)
from .finset import (
    EMPTY,
    FinFunction,
    FinSet,
    compose,
    coproduct_map,
    pushout,
    _iso_budget,
)
from .systems import (
    Graph,
    LabeledGraph,
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
    system_coproduct,
    system_pushout,
    validate_morphism,
    _graph_of,
    _net_of,
)


@dataclass(frozen=True)
class DecoratedCospan:
    """A cospan of finite sets whose apex carries a system."""

    foot_left: FinSet
    foot_right: FinSet
    leg_left: FinFunction
    leg_right: FinFunction
    decoration: System

    def __post_init__(self) -> None:
        apex = interface_of(self.decoration)
        if self.leg_left.dom != self.foot_left or self.leg_left.cod != apex:
            raise ValueError("left leg must map the left foot into the apex")
        if self.leg_right.dom != self.foot_right or self.leg_right.cod != apex:
            raise ValueError("right leg must map the right foot into the apex")

    @property
    def apex(self) -> FinSet:
        return interface_of(self.decoration)

    @property
    def kind(self) -> str:
        return self.decoration.kind


@dataclass(frozen=True)
class StructuredCospan:
    """A cospan of systems.  Feet are meant to be structureless (images of
    the free functor on finite sets); `violations` reports when they are not.
    """

    leg_left: SystemMorphism
    leg_right: SystemMorphism

    def __post_init__(self) -> None:
        if self.leg_left.cod != self.leg_right.cod:
            raise ValueError("both legs must land in one shared apex system")

    @property
    def system(self) -> System:
        return self.leg_left.cod

    @property
    def apex(self) -> FinSet:
        return interface_of(self.system)

    @property
    def foot_left(self) -> FinSet:
        return interface_of(self.leg_left.dom)

    @property
    def foot_right(self) -> FinSet:
        return interface_of(self.leg_right.dom)

    @property
    def kind(self) -> str:
        return self.system.kind

    def violations(self) -> list[str]:
        # legs are boundary inclusions: the rated fiber-sum rule does not
        # apply to them, only the underlying-net conditions do
        out = []
        for name, leg in (("left", self.leg_left), ("right", self.leg_right)):
            if not is_discrete(leg.dom):
                out.append(f"{name} foot is not discrete")
            out.extend(
                f"{name} leg: {v}" for v in validate_morphism(leg, check_rates=False)
            )
        return out


Cospan = Union[DecoratedCospan, StructuredCospan]


def representation_of(cospan: Cospan) -> str:
    return "decorated" if isinstance(cospan, DecoratedCospan) else "structured"


def identity_cospan(kind: str, feet: FinSet, representation: str = "decorated") -> Cospan:
    """The unit cospan on a set: both legs the identity, structureless apex."""
    ident = FinFunction.identity(feet)
    if representation == "decorated":
        return DecoratedCospan(feet, feet, ident, ident, discrete(kind, feet))
    if representation == "structured":
        leg = SystemMorphism.identity(discrete(kind, feet))
        return StructuredCospan(leg, leg)
    raise ValueError(f"unknown representation {representation!r}")


def _same_species(m: Cospan, n: Cospan, what: str) -> None:
    if type(m) is not type(n):
        raise ComposabilityError(f"cannot {what} a decorated and a structured cospan")
    if m.kind != n.kind:
        raise KindError(f"cannot {what} cospans of kinds {m.kind!r} and {n.kind!r}")


def hcompose(m: Cospan, n: Cospan) -> Cospan:
    """Glue m's right foot to n's left foot over the chosen pushout."""
    _same_species(m, n, "compose")
    if isinstance(m, DecoratedCospan):
        assert isinstance(n, DecoratedCospan)
        if m.foot_right != n.foot_left:
            raise ComposabilityError(
                f"feet disagree: right foot has size {m.foot_right.size}, "
                f"left foot has size {n.foot_left.size}"
            )
        po = pushout(m.leg_right, n.leg_left)
        theory = decoration_theory(m.kind)
        decoration = theory.reindex(po.quotient, theory.laxator(m.decoration, n.decoration))
        return DecoratedCospan(
            m.foot_left,
            n.foot_right,
            compose(po.left, m.leg_left),
            compose(po.right, n.leg_right),
            decoration,
        )
    assert isinstance(n, StructuredCospan)
    if m.leg_right.dom != n.leg_left.dom:
        raise ComposabilityError("feet disagree: the shared foot system must be equal")
    _, inj_m, inj_n = system_pushout(m.leg_right, n.leg_left)
    return StructuredCospan(
        compose_morphism(inj_m, m.leg_left), compose_morphism(inj_n, n.leg_right)
    )


def tensor(m: Cospan, n: Cospan) -> Cospan:
    """Set two open systems side by side; feet and apexes become coproducts."""
    _same_species(m, n, "tensor")
    if isinstance(m, DecoratedCospan):
        assert isinstance(n, DecoratedCospan)
        theory = decoration_theory(m.kind)
        return DecoratedCospan(
            FinSet(m.foot_left.size + n.foot_left.size),
            FinSet(m.foot_right.size + n.foot_right.size),
            coproduct_map(m.leg_left, n.leg_left),
            coproduct_map(m.leg_right, n.leg_right),
            theory.laxator(m.decoration, n.decoration),
        )
    assert isinstance(n, StructuredCospan)
    _, inj_m, inj_n = system_coproduct(m.system, n.system)

    def side(leg_m: SystemMorphism, leg_n: SystemMorphism) -> SystemMorphism:
        foot, _, _ = system_coproduct(leg_m.dom, leg_n.dom)
        return SystemMorphism(
            foot,
            inj_m.cod,
            _tensor_leg_map(leg_m.node_map, leg_n.node_map, inj_m.node_map, inj_n.node_map),
            _tensor_leg_map(leg_m.edge_map, leg_n.edge_map, inj_m.edge_map, inj_n.edge_map),
        )

    return StructuredCospan(
        side(m.leg_left, n.leg_left), side(m.leg_right, n.leg_right)
    )


def _tensor_leg_map(
    f: FinFunction, g: FinFunction, inj_left: FinFunction, inj_right: FinFunction
) -> FinFunction:
    """The coproduct of two legs, re-addressed through the apex injections."""
    table = tuple(inj_left.table[y] for y in f.table) + tuple(
        inj_right.table[y] for y in g.table
    )
    return FinFunction(FinSet(f.dom.size + g.dom.size), inj_left.cod, table)


def to_structured(cospan: DecoratedCospan) -> StructuredCospan:
    """Repackage a decorated cospan with its feet made structureless systems."""
    kind = cospan.kind
    no_cells = FinFunction.from_empty(cells_of(cospan.decoration))
    return StructuredCospan(
        SystemMorphism(discrete(kind, cospan.foot_left), cospan.decoration, cospan.leg_left, no_cells),
        SystemMorphism(discrete(kind, cospan.foot_right), cospan.decoration, cospan.leg_right, no_cells),
    )


def to_decorated(cospan: StructuredCospan) -> DecoratedCospan:
    """Read a structured cospan as a decorated one.  Feet must be discrete."""
    for name, leg in (("left", cospan.leg_left), ("right", cospan.leg_right)):
        if not is_discrete(leg.dom):
            raise NotInImageOfL(
                f"{name} foot carries {cells_of(leg.dom).size} cells; "
                "only structureless feet have a decorated form"
            )
    return DecoratedCospan(
        cospan.foot_left,
        cospan.foot_right,
        cospan.leg_left.node_map,
        cospan.leg_right.node_map,
        cospan.system,
    )


def reverse(cospan: Cospan) -> Cospan:
    """Swap the two feet; the apex and its structure stay put."""
    if isinstance(cospan, DecoratedCospan):
        return DecoratedCospan(
            cospan.foot_right,
            cospan.foot_left,
            cospan.leg_right,
            cospan.leg_left,
            cospan.decoration,
        )
    return StructuredCospan(cospan.leg_right, cospan.leg_left)


def _payload(cospan: Cospan) -> System:
    return cospan.decoration if isinstance(cospan, DecoratedCospan) else cospan.system


def _leg_maps(cospan: Cospan) -> tuple[FinFunction, FinFunction]:
    if isinstance(cospan, DecoratedCospan):
        return cospan.leg_left, cospan.leg_right
    return cospan.leg_left.node_map, cospan.leg_right.node_map


@dataclass(frozen=True)
class TwoMorphism:
    """A square between two parallel-ish cospans.

    `left` and `right` rename the feet, `apex_map` the apex, and `cell_map`
    the edges or transitions; together (apex_map, cell_map) must be a valid
    morphism of the apex systems, and the two leg squares must commute.
    """

    src: Cospan
    tgt: Cospan
    left: FinFunction
    right: FinFunction
    apex_map: FinFunction
    cell_map: FinFunction

    def violations(self) -> list[str]:
        out: list[str] = []
        src_l, src_r = _leg_maps(self.src)
        tgt_l, tgt_r = _leg_maps(self.tgt)
        if type(self.src) is not type(self.tgt) or self.src.kind != self.tgt.kind:
            return ["source and target cospans are of different species"]
        if self.left.dom != self.src.foot_left or self.left.cod != self.tgt.foot_left:
            return ["left foot map has the wrong endpoints"]
        if self.right.dom != self.src.foot_right or self.right.cod != self.tgt.foot_right:
            return ["right foot map has the wrong endpoints"]
        if compose(self.apex_map, src_l) != compose(tgt_l, self.left):
            out.append("left leg square does not commute")
        if compose(self.apex_map, src_r) != compose(tgt_r, self.right):
            out.append("right leg square does not commute")
        try:
            carrier = SystemMorphism(
                _payload(self.src), _payload(self.tgt), self.apex_map, self.cell_map
            )
        except Exception as exc:  # shape problems read better as one violation
            out.append(f"apex morphism ill-shaped: {exc}")
            return out
        out.extend(validate_morphism(carrier))
        return out

    @staticmethod
    def identity(cospan: Cospan) -> TwoMorphism:
        return TwoMorphism(
            cospan,
            cospan,
            FinFunction.identity(cospan.foot_left),
            FinFunction.identity(cospan.foot_right),
            FinFunction.identity(cospan.apex),
            FinFunction.identity(cells_of(_payload(cospan))),
        )


def unit_cell(f: FinFunction, kind: str, representation: str = "decorated") -> TwoMorphism:
    """The square between unit cospans induced by a function on feet."""
    return TwoMorphism(
        identity_cospan(kind, f.dom, representation),
        identity_cospan(kind, f.cod, representation),
        f,
        f,
        f,
        FinFunction.identity(EMPTY),
    )


def vcompose(a: TwoMorphism, b: TwoMorphism) -> TwoMorphism:
    """Stack two squares: a first, then b."""
    if a.tgt != b.src:
        raise BoundaryError("vertical composition needs a.tgt == b.src")
    return TwoMorphism(
        a.src,
        b.tgt,
        compose(b.left, a.left),
        compose(b.right, a.right),
        compose(b.apex_map, a.apex_map),
        compose(b.cell_map, a.cell_map),
    )


def hcompose_cells(a: TwoMorphism, b: TwoMorphism) -> TwoMorphism:
    """Paste two squares side by side over the composed cospans.

    The composite apex map is the one induced between the two chosen
    pushouts; it is computed on representatives and checked for
    consistency, so pasting invalid squares fails loudly.
    """
    if a.right != b.left:
        raise BoundaryError("horizontal pasting needs a.right == b.left")
    src = hcompose(a.src, b.src)
    tgt = hcompose(a.tgt, b.tgt)
    src_po = pushout(_leg_maps(a.src)[1], _leg_maps(b.src)[0])
    tgt_po = pushout(_leg_maps(a.tgt)[1], _leg_maps(b.tgt)[0])

    m_size = a.src.apex.size
    apex_table = [-1] * src_po.apex.size
    for z, cls in enumerate(src_po.quotient.table):
        if z < m_size:
            image = tgt_po.left.table[a.apex_map.table[z]]
        else:
            image = tgt_po.right.table[b.apex_map.table[z - m_size]]
        if apex_table[cls] < 0:
            apex_table[cls] = image
        elif apex_table[cls] != image:
            raise BoundaryError(
                "squares do not agree on the glued apex; are both valid 2-morphisms?"
            )
    apex_map = FinFunction(src_po.apex, tgt_po.apex, tuple(apex_table))

    a_cells = cells_of(_payload(a.src)).size
    tgt_a_cells = cells_of(_payload(a.tgt)).size
    cell_table = tuple(a.cell_map.table) + tuple(
        tgt_a_cells + y for y in b.cell_map.table
    )
    cell_map = FinFunction(
        FinSet(a_cells + cells_of(_payload(b.src)).size),
        FinSet(tgt_a_cells + cells_of(_payload(b.tgt)).size),
        cell_table,
    )
    return TwoMorphism(src, tgt, a.left, b.right, apex_map, cell_map)


def _unitor(cospan: Cospan, on_left: bool) -> TwoMorphism:
    """The square from (unit ; m) or (m ; unit) down to m itself."""
    representation = representation_of(cospan)
    kind = cospan.kind
    leg_l, leg_r = _leg_maps(cospan)
    if on_left:
        unit = identity_cospan(kind, cospan.foot_left, representation)
        composite = hcompose(unit, cospan)
        po = pushout(_leg_maps(unit)[1], leg_l)
        foot = cospan.foot_left
        apex_table = [-1] * po.apex.size
        for z, cls in enumerate(po.quotient.table):
            apex_table[cls] = leg_l.table[z] if z < foot.size else z - foot.size
        cells = FinFunction.identity(cells_of(_payload(cospan)))
    else:
        unit = identity_cospan(kind, cospan.foot_right, representation)
        composite = hcompose(cospan, unit)
        po = pushout(leg_r, _leg_maps(unit)[0])
        apex_size = cospan.apex.size
        apex_table = [-1] * po.apex.size
        for z, cls in enumerate(po.quotient.table):
            apex_table[cls] = z if z < apex_size else leg_r.table[z - apex_size]
        cells = FinFunction.identity(cells_of(_payload(cospan)))
    return TwoMorphism(
        composite,
        cospan,
        FinFunction.identity(cospan.foot_left),
        FinFunction.identity(cospan.foot_right),
        FinFunction(po.apex, cospan.apex, tuple(apex_table)),
        cells,
    )


def left_unitor(cospan: Cospan) -> TwoMorphism:
    """hcompose(unit, m) -> m, collapsing the glued-in identity foot."""
    return _unitor(cospan, on_left=True)


def right_unitor(cospan: Cospan) -> TwoMorphism:
    """hcompose(m, unit) -> m."""
    return _unitor(cospan, on_left=False)


@dataclass(frozen=True)
class AdjointPair:
    """A one-leg-trivial cospan built from a function, with its two squares."""

    cospan: Cospan
    to_unit: TwoMorphism
    from_unit: TwoMorphism


def companion(f: FinFunction, kind: str = "graph", representation: str = "decorated") -> AdjointPair:
    """Turn a function into a horizontal cospan that travels with it.

    The cospan runs f on the left leg and the identity on the right;
    `to_unit` squashes it onto the unit at the codomain, `from_unit`
    grows it out of the unit at the domain.
    """
    a, b = f.dom, f.cod
    ident_b = FinFunction.identity(b)
    if representation == "decorated":
        cospan: Cospan = DecoratedCospan(a, b, f, ident_b, discrete(kind, b))
    else:
        cospan = to_structured(DecoratedCospan(a, b, f, ident_b, discrete(kind, b)))
    no_cells = FinFunction.identity(EMPTY)
    to_unit = TwoMorphism(
        cospan, identity_cospan(kind, b, representation), f, ident_b, ident_b, no_cells
    )
    from_unit = TwoMorphism(
        identity_cospan(kind, a, representation), cospan, FinFunction.identity(a), f, f, no_cells
    )
    return AdjointPair(cospan, to_unit, from_unit)


def conjoint(f: FinFunction, kind: str = "graph", representation: str = "decorated") -> AdjointPair:
    """The mirror image of `companion`: the same cospan with its legs swapped."""
    comp = companion(f, kind, representation)
    cospan = reverse(comp.cospan)
    a, b = f.dom, f.cod
    no_cells = FinFunction.identity(EMPTY)
    to_unit = TwoMorphism(
        cospan,
        identity_cospan(kind, b, representation),
        FinFunction.identity(b),
        f,
        FinFunction.identity(b),
        no_cells,
    )
    from_unit = TwoMorphism(
        identity_cospan(kind, a, representation),
        cospan,
        f,
        FinFunction.identity(a),
        f,
        no_cells,
    )
    return AdjointPair(cospan, to_unit, from_unit)


def check_companion(f: FinFunction, kind: str = "graph", representation: str = "decorated") -> tuple[bool, str]:
    """Verify the two defining equations of the companion of f.

    The straight equation stacks from_unit over to_unit and must equal the
    unit square on f.  The bent equation pastes the two squares side by
    side and must match one unitor through the other, both unitors being
    computed from the chosen pushouts.
    """
    pair = companion(f, kind, representation)
    for name, cell in (("to_unit", pair.to_unit), ("from_unit", pair.from_unit)):
        bad = cell.violations()
        if bad:
            return False, f"{name} is not a valid square: {bad[0]}"
    straight = vcompose(pair.from_unit, pair.to_unit)
    if straight != unit_cell(f, kind, representation):
        return False, "stacked squares do not equal the unit square on f"
    bent = vcompose(hcompose_cells(pair.from_unit, pair.to_unit), right_unitor(pair.cospan))
    if bent != left_unitor(pair.cospan):
        return False, "bent composite does not match the unitors"
    return True, ""


def check_conjoint(f: FinFunction, kind: str = "graph", representation: str = "decorated") -> tuple[bool, str]:
    """Verify the two defining equations of the conjoint of f (mirror image)."""
    pair = conjoint(f, kind, representation)
    for name, cell in (("to_unit", pair.to_unit), ("from_unit", pair.from_unit)):
        bad = cell.violations()
        if bad:
            return False, f"{name} is not a valid square: {bad[0]}"
    straight = vcompose(pair.from_unit, pair.to_unit)
    if straight != unit_cell(f, kind, representation):
        return False, "stacked squares do not equal the unit square on f"
    bent = vcompose(hcompose_cells(pair.to_unit, pair.from_unit), left_unitor(pair.cospan))
    if bent != right_unitor(pair.cospan):
        return False, "bent composite does not match the unitors"
    return True, ""


@dataclass(frozen=True)
class IsoWitness:
    """An explicit isomorphism between two cospans over the same feet."""

    node_map: FinFunction
    cell_map: FinFunction


def _cell_key_graph(system: System, h: FinFunction, relabel_side: bool):
    g = _graph_of(system)
    labels = system.labels if isinstance(system, LabeledGraph) else None

    def key(e: int):
        s, t = g.src.table[e], g.tgt.table[e]
        if relabel_side:
            s, t = h.table[s], h.table[t]
        label = labels[e] if labels is not None else None
        return (s, t, label)

    return key


def _cell_key_petri(system: System, h: FinFunction, relabel_side: bool):
    net = _net_of(system)
    rates = system.rates if isinstance(system, PetriNetWithRates) else None

    def key(t: int):
        src, tgt = net.src[t], net.tgt[t]
        if relabel_side:
            src, tgt = src.pushforward(h), tgt.pushforward(h)
        rate = rates[t] if rates is not None else None
        return (src.counts, tgt.counts, rate)

    return key


def match_cells(d: System, e: System, h: FinFunction) -> Optional[FinFunction]:
    """Given a node bijection h, find the matching bijection on cells.

    Cells are grouped by their structural fingerprint after relabeling
    through h; the bijection pairs groups in ascending order, so the
    witness is deterministic.  Returns None when the fingerprints differ.
    """
    if isinstance(d, (Graph, LabeledGraph)):
        key_d = _cell_key_graph(d, h, relabel_side=True)
        key_e = _cell_key_graph(e, h, relabel_side=False)
    else:
        key_d = _cell_key_petri(d, h, relabel_side=True)
        key_e = _cell_key_petri(e, h, relabel_side=False)
    groups_d: dict = {}
    for c in cells_of(d):
        groups_d.setdefault(key_d(c), []).append(c)
    groups_e: dict = {}
    for c in cells_of(e):
        groups_e.setdefault(key_e(c), []).append(c)
    if set(groups_d) != set(groups_e):
        return None
    table = [-1] * cells_of(d).size
    for key, members in groups_d.items():
        partners = groups_e[key]
        if len(members) != len(partners):
            return None
        for c, c2 in zip(members, partners):
            table[c] = c2
    return FinFunction(cells_of(d), cells_of(e), tuple(table))


def _graph_adjacency(system: System) -> dict[tuple[int, int], Counter]:
    g = _graph_of(system)
    labels = system.labels if isinstance(system, LabeledGraph) else None
    adj: dict[tuple[int, int], Counter] = {}
    for e in g.edges:
        key = (g.src.table[e], g.tgt.table[e])
        adj.setdefault(key, Counter())[labels[e] if labels is not None else None] += 1
    return adj


def _petri_signature(system: System) -> list[tuple]:
    net = _net_of(system)
    rates = system.rates if isinstance(system, PetriNetWithRates) else None
    sigs = []
    for p in net.places:
        profile = sorted(
            (net.src[t].counts[p], net.tgt[t].counts[p], rates[t] if rates is not None else None)
            for t in net.transitions
        )
        sigs.append(tuple(profile))
    return sigs


def cospan_iso(m: Cospan, n: Cospan, budget: Optional[int] = None) -> Optional[IsoWitness]:
    """Decide whether two cospans over the same feet are isomorphic.

    Searches for an apex bijection commuting with both pairs of legs whose
    relabeling carries one decoration onto the other; the cell part of the
    witness is then forced by `match_cells`.  Backtracking assigns apex
    elements in ascending order with structural pruning (pairwise adjacency
    counts for graph kinds, per-place profiles for Petri kinds), and charges
    each attempted assignment against the same node budget as `find_iso`.
    """
    if type(m) is not type(n) or m.kind != n.kind:
        return None
    if isinstance(m, StructuredCospan):
        if m.leg_left.dom != n.leg_left.dom or m.leg_right.dom != n.leg_right.dom:
            return None
    elif m.foot_left != n.foot_left or m.foot_right != n.foot_right:
        return None
    d, e = _payload(m), _payload(n)
    apex_m, apex_n = m.apex, n.apex
    if apex_m.size != apex_n.size or cells_of(d).size != cells_of(e).size:
        return None

    assignment: list[Optional[int]] = [None] * apex_m.size
    used = [False] * apex_n.size
    for (pm, qm) in zip(_leg_maps(m), _leg_maps(n)):
        for x in pm.dom:
            s, t = pm.table[x], qm.table[x]
            if assignment[s] is None:
                if used[t]:
                    return None
                assignment[s] = t
                used[t] = True
            elif assignment[s] != t:
                return None

    graph_like = isinstance(d, (Graph, LabeledGraph))
    if graph_like:
        adj_m = _graph_adjacency(d)
        adj_n = _graph_adjacency(e)

        def compatible(x: int, y: int) -> bool:
            for x2, y2 in enumerate(assignment):
                if y2 is None:
                    continue
                if adj_m.get((x, x2), Counter()) != adj_n.get((y, y2), Counter()):
                    return False
                if adj_m.get((x2, x), Counter()) != adj_n.get((y2, y), Counter()):
                    return False
            return True

    else:
        sig_m = _petri_signature(d)
        sig_n = _petri_signature(e)

        def compatible(x: int, y: int) -> bool:
            return sig_m[x] == sig_n[y]

    for x, y in enumerate(assignment):
        if y is not None and not compatible(x, y):
            return None

    max_nodes = _iso_budget(budget)
    free = [x for x in range(apex_m.size) if assignment[x] is None]
    nodes = 0

    def finish() -> Optional[IsoWitness]:
        h = FinFunction(apex_m, apex_n, tuple(assignment))  # type: ignore[arg-type]
        cells = match_cells(d, e, h)
        if cells is None:
            return None
        return IsoWitness(h, cells)

    def extend(i: int) -> Optional[IsoWitness]:
        nonlocal nodes
        if i == len(free):
            return finish()
        x = free[i]
        for y in range(apex_n.size):
            if used[y]:
                continue
            nodes += 1
            if nodes > max_nodes:
                raise BudgetExceeded(
                    f"cospan isomorphism search exceeded its budget of {max_nodes} nodes"
                )
            if not compatible(x, y):
                continue
            assignment[x] = y
            used[y] = True
            found = extend(i + 1)
            if found is not None:
                return found
            assignment[x] = None
            used[y] = False
        return None

    return finish() if not free else extend(0)
