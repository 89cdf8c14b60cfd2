"""Polynomial fields, mass-action, gray-boxing, and the integrator."""

import math
from random import Random

import pytest

from opencospan import (
    EMPTY,
    DecoratedCospan,
    DimensionError,
    DivergenceError,
    FinFunction,
    FinSet,
    FlowSchedule,
    KindError,
    Multiset,
    OpenDynam,
    PetriNet,
    PetriNetWithRates,
    PiecewiseConstant,
    Poly,
    PolyVectorField,
    admits_morphism_from_empty,
    compose,
    compose_open_dynam,
    discrete,
    field_close,
    graybox,
    identity_cospan,
    mass_action,
    open_dynam_iso,
    open_rate_rhs,
    poly_add,
    poly_close,
    pushforward_field,
    simulate,
    to_structured,
)
from opencospan.laws import decay_open_net, sir_open_net, water_net


def fn(table, cod):
    return FinFunction(FinSet(len(table)), FinSet(cod), tuple(table))


def mono(nvars, coeff, exps):
    return Poly(nvars, ((coeff, tuple(exps)),))


# -- polynomials --------------------------------------------------------------------


def test_from_terms_combines_sorts_and_drops():
    p = Poly.from_terms(2, [(1.0, (1, 0)), (2.0, (0, 1)), (3.0, (1, 0)), (1e-15, (2, 0))])
    assert p.terms == ((2.0, (0, 1)), (4.0, (1, 0)))
    assert Poly.from_terms(2, [(1.0, (1, 1)), (-1.0, (1, 1))]) == Poly.zero(2)


def test_canonical_form_is_enforced_at_construction():
    with pytest.raises(ValueError):
        Poly(1, ((1.0, (1,)), (1.0, (0,))))  # unsorted
    with pytest.raises(ValueError):
        Poly(1, ((1.0, (0,)), (2.0, (0,))))  # duplicate exponents
    with pytest.raises(ValueError):
        Poly(1, ((1e-13, (0,)),))  # below the storage threshold
    with pytest.raises(ValueError):
        Poly(1, ((1.0, (-1,)),))
    with pytest.raises(ValueError):
        Poly(2, ((1.0, (1,)),))  # wrong arity


def test_from_terms_is_idempotent():
    rng = Random(3)
    for _ in range(50):
        raw = [
            (rng.uniform(-2, 2), tuple(rng.randrange(3) for _ in range(2)))
            for _ in range(rng.randrange(6))
        ]
        p = Poly.from_terms(2, raw)
        assert Poly.from_terms(2, p.terms) == p


def test_evaluate_multiplies_out():
    p = Poly.from_terms(2, [(2.0, (1, 1)), (-1.0, (0, 2))])
    assert p.evaluate([3.0, 4.0]) == 2.0 * 3.0 * 4.0 - 16.0
    with pytest.raises(DimensionError):
        p.evaluate([1.0])


def test_substitute_merges_exponents():
    p = mono(2, 5.0, (1, 2))
    q = p.substitute_along(fn([0, 0], 1))
    assert q.terms == ((5.0, (3,)),)
    cancel = Poly.from_terms(2, [(1.0, (1, 0)), (-1.0, (0, 1))])
    assert cancel.substitute_along(fn([0, 0], 1)) == Poly.zero(1)


def test_poly_add_and_close():
    a = mono(1, 1.0, (1,))
    b = mono(1, 1e-10, (1,))
    assert poly_add(a, b).terms[0][0] == 1.0 + 1e-10
    assert poly_close(a, poly_add(a, b))
    assert not poly_close(a, poly_add(a, mono(1, 1e-2, (1,))))
    # a term dropped at the storage threshold still compares close
    assert poly_close(Poly.zero(1), Poly.from_terms(1, [(1e-13, (0,))]))
    assert not poly_close(mono(1, 1.0, (1,)), mono(1, 1.0, (2,)))
    with pytest.raises(DimensionError):
        poly_add(mono(1, 1.0, (1,)), mono(2, 1.0, (1, 0)))


# -- mass-action ---------------------------------------------------------------------


def test_mass_action_of_the_epidemic_net():
    field = mass_action(sir_open_net().decoration)
    s, i, r = field.components
    assert s.terms == ((-0.3, (1, 1, 0)),)
    assert i.terms == ((-0.1, (0, 1, 0)), (0.3, (1, 1, 0)))
    assert r.terms == ((0.1, (0, 1, 0)),)


def test_mass_action_respects_input_multiplicities():
    field = mass_action(water_net())
    a, b, c = field.components
    assert a.terms == ((-2.0, (2, 1, 0)),)
    assert b.terms == ((-1.0, (2, 1, 0)),)
    assert c.terms == ((1.0, (2, 1, 0)),)


def test_mass_action_of_a_discrete_net_is_zero():
    net = discrete("petri_rates", FinSet(2))
    assert mass_action(net) == PolyVectorField.zero(FinSet(2))


def test_catalytic_transitions_contribute_nothing():
    places = FinSet(1)
    ms = Multiset(places, (1,))
    net = PetriNetWithRates(PetriNet(places, FinSet(1), (ms,), (ms,)), (2.0,))
    assert mass_action(net) == PolyVectorField.zero(places)


# -- pushforward ----------------------------------------------------------------------


def test_pushforward_along_identity_is_identity():
    field = mass_action(water_net())
    assert pushforward_field(FinFunction.identity(FinSet(3)), field) == field


def test_pushforward_merges_components():
    v = PolyVectorField(FinSet(2), (mono(2, 1.0, (0, 1)), mono(2, 1.0, (1, 0))))
    merged = pushforward_field(fn([0, 0], 1), v)
    assert merged.components[0].terms == ((2.0, (1,)),)


def random_int_field(rng, n, max_terms=3):
    comps = []
    for _ in range(n):
        raw = [
            (float(rng.choice((-2, -1, 1, 2))), tuple(rng.randrange(3) for _ in range(n)))
            for _ in range(rng.randrange(max_terms + 1))
        ]
        comps.append(Poly.from_terms(n, raw))
    return PolyVectorField(FinSet(n), tuple(comps))


def test_pushforward_is_functorial_on_the_nose():
    # integer coefficients keep float addition exact, so equality is literal
    rng = Random(21)
    for _ in range(40):
        n = rng.randint(0, 3)
        v = random_int_field(rng, n)
        f = fn([rng.randrange(3) for _ in range(n)], 3)
        g = fn([rng.randrange(2) for _ in range(3)], 2)
        gf = FinFunction(FinSet(n), FinSet(2), tuple(g.table[y] for y in f.table))
        assert pushforward_field(gf, v) == pushforward_field(g, pushforward_field(f, v))


def test_pushforward_agrees_with_numeric_fiber_sums():
    rng = Random(22)
    for _ in range(30):
        n = rng.randint(1, 3)
        v = random_int_field(rng, n)
        f = fn([rng.randrange(2) for _ in range(n)], 2)
        moved = pushforward_field(f, v)
        point = [rng.uniform(-2, 2) for _ in range(2)]
        pulled = [point[f.table[i]] for i in range(n)]
        values = v.evaluate(pulled)
        for j in range(2):
            want = sum(values[i] for i in range(n) if f.table[i] == j)
            assert math.isclose(moved.components[j].evaluate(point), want, rel_tol=1e-9, abs_tol=1e-9)


def test_only_the_zero_field_admits_a_map_from_nothing():
    assert admits_morphism_from_empty(PolyVectorField.zero(FinSet(2)))
    v = PolyVectorField(FinSet(1), (mono(1, 1.0, (1,)),))
    assert not admits_morphism_from_empty(v)


# -- open dynamics ----------------------------------------------------------------------


def one_place_dynam(poly, expose_left=False, expose_right=False):
    place = FinSet(1)
    left = FinSet(1 if expose_left else 0)
    right = FinSet(1 if expose_right else 0)
    return OpenDynam(
        left,
        right,
        FinFunction(left, place, (0,) * left.size),
        FinFunction(right, place, (0,) * right.size),
        PolyVectorField(place, (poly,)),
    )


def test_composing_open_fields_adds_them_over_the_glued_place():
    quad = one_place_dynam(mono(1, 1.0, (2,)), expose_right=True)
    drain = one_place_dynam(mono(1, -1.0, (1,)), expose_left=True)
    joined = compose_open_dynam(quad, drain)
    assert joined.apex == FinSet(1)
    assert joined.field.components[0].terms == ((-1.0, (1,)), (1.0, (2,)))
    assert joined.foot_left == EMPTY and joined.foot_right == EMPTY


def test_open_composition_is_associative_up_to_iso():
    from opencospan.laws import random_composable

    rng = Random(23)
    for _ in range(20):
        m, n, p = (
            graybox(c) for c in random_composable(rng, "petri_rates", 3, max_apex=4)
        )
        lhs = compose_open_dynam(compose_open_dynam(m, n), p)
        rhs = compose_open_dynam(m, compose_open_dynam(n, p))
        assert open_dynam_iso(lhs, rhs) is not None


def test_graybox_keeps_the_boundary_and_takes_mass_action():
    net = sir_open_net()
    system = graybox(net)
    assert system.leg_left == net.leg_left and system.leg_right == net.leg_right
    assert system.field == mass_action(net.decoration)
    assert graybox(to_structured(net)).field == system.field
    with pytest.raises(KindError):
        graybox(identity_cospan("graph", FinSet(1)))


def test_open_dynam_iso_finds_the_relabeling():
    system = graybox(sir_open_net())
    sigma = fn([1, 2, 0], 3)
    moved = OpenDynam(
        system.foot_left,
        system.foot_right,
        compose(sigma, system.leg_left),
        compose(sigma, system.leg_right),
        pushforward_field(sigma, system.field),
    )
    assert open_dynam_iso(system, moved) == sigma
    assert open_dynam_iso(system, graybox(decay_open_net())) is None


# -- boundary flows and integration --------------------------------------------------------


def test_piecewise_constant_is_right_continuous():
    f = PiecewiseConstant((1.0, 2.0), (0.0, 5.0, 7.0))
    assert f(0.99) == 0.0
    assert f(1.0) == 5.0
    assert f(1.5) == 5.0
    assert f(2.0) == 7.0
    assert PiecewiseConstant.constant(3.0)(123.0) == 3.0


def test_piecewise_constant_validation():
    with pytest.raises(ValueError):
        PiecewiseConstant((1.0,), (0.0,))
    with pytest.raises(ValueError):
        PiecewiseConstant((2.0, 1.0), (0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        PiecewiseConstant((), (math.inf,))


def test_open_rate_rhs_routes_flows_through_the_legs():
    system = graybox(sir_open_net())
    schedule = FlowSchedule(
        (PiecewiseConstant.constant(0.5), PiecewiseConstant.constant(0.25),
         PiecewiseConstant.constant(2.0)),
        (PiecewiseConstant.constant(1.0),),
    )
    state = [0.9, 0.1, 0.0]
    out = open_rate_rhs(system, schedule, 0.0, state)
    base = system.field.evaluate(state)
    # the two first inflows both feed S, the third feeds I, the outflow drains R
    assert out[0] == base[0] + 0.5 + 0.25
    assert out[1] == base[1] + 2.0
    assert out[2] == base[2] - 1.0
    with pytest.raises(DimensionError):
        open_rate_rhs(system, FlowSchedule.zero(1, 1), 0.0, state)


def test_simulate_zero_field_stays_put():
    system = one_place_dynam(Poly.zero(1))
    traj = simulate(system, FlowSchedule.zero(0, 0), [4.0], 0.0, 1.0, 0.25)
    assert [t for t, _ in traj] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert all(state == (4.0,) for _, state in traj)


def test_simulate_constant_inflow_grows_linearly():
    system = one_place_dynam(Poly.zero(1), expose_left=True)
    schedule = FlowSchedule((PiecewiseConstant.constant(2.0),), ())
    traj = simulate(system, schedule, [0.0], 0.0, 3.0, 0.5)
    t, state = traj[-1]
    assert t == 3.0
    assert abs(state[0] - 6.0) < 1e-12


def test_simulate_matches_exponential_decay():
    system = graybox(decay_open_net(rate=0.5))
    traj = simulate(system, FlowSchedule.zero(0, 0), [1.0], 0.0, 5.0, 1e-3)
    worst = max(abs(state[0] - math.exp(-0.5 * t)) for t, state in traj)
    assert worst < 1e-6


def test_simulate_shortens_the_final_step():
    system = one_place_dynam(Poly.zero(1))
    traj = simulate(system, FlowSchedule.zero(0, 0), [1.0], 0.0, 1.0, 0.3)
    assert [t for t, _ in traj] == [0.0, 0.3, 0.6, 0.8999999999999999, 1.0]
    # a step larger than the whole window collapses to one shortened step
    traj = simulate(system, FlowSchedule.zero(0, 0), [1.0], 0.0, 0.1, 5.0)
    assert [t for t, _ in traj] == [0.0, 0.1]


def test_simulate_rejects_bad_windows():
    system = one_place_dynam(Poly.zero(1))
    with pytest.raises(ValueError):
        simulate(system, FlowSchedule.zero(0, 0), [1.0], 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        simulate(system, FlowSchedule.zero(0, 0), [1.0], 1.0, 1.0, 0.1)
    with pytest.raises(DimensionError):
        simulate(system, FlowSchedule.zero(0, 0), [1.0, 2.0], 0.0, 1.0, 0.1)


def test_simulate_reports_divergence_with_the_last_good_time():
    # dx/dt = x^2 from x(0) = 10 blows up at t = 0.1
    system = one_place_dynam(mono(1, 1.0, (2,)))
    with pytest.raises(DivergenceError) as excinfo:
        simulate(system, FlowSchedule.zero(0, 0), [10.0], 0.0, 1.0, 0.01)
    assert 0.0 <= excinfo.value.last_good_time < 0.2
