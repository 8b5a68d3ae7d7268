import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotorrouter.rotor1d import (
    EmptyIntervalError, ExitSide, LabelState1D, MAX_COORD, Params1D, RecTriple,
    apply_piecewise, as_triple, equilibrate_explicit, invariant_g, is_plus_step, iterate,
    orbit_arrays, orbit_key, oracle_sweep, recurrent_interval, reduce_to_recurrent, render,
    same_orbit, z_from_invariant, zigzag_landmarks,
)

from oracles import label_walk, piecewise, render as render_list

P11, P21 = Params1D(1, 1), Params1D(2, 1)


@st.composite
def triples(draw, bound=60):
    x = draw(st.integers(-bound, 0))
    y = draw(st.integers(0, bound))
    z = draw(st.integers(x, y))
    return RecTriple(x, y, z)


params_st = st.builds(Params1D, st.integers(1, 10), st.integers(1, 10))


def test_params_validation():
    with pytest.raises(ValueError):
        Params1D(0, 1)
    with pytest.raises(ValueError):
        Params1D(1, -2)


def test_triple_validation():
    with pytest.raises(ValueError):
        RecTriple(1, 0, 0).validate()
    with pytest.raises(ValueError):
        RecTriple(-1, 1, 2).validate()
    assert RecTriple(-2, 3, 1).is_valid


# ---- explicit walks

def test_single_site_walk():
    out, side = equilibrate_explicit(LabelState1D.initial(), P11)
    assert side is ExitSide.RIGHT
    assert (out.x, out.y, out.label_string()) == (0, 1, "LR")


def test_walk_from_rrr():
    out, side = equilibrate_explicit(LabelState1D.from_string(-1, "RRR"), P11, check=True)
    assert side is ExitSide.RIGHT
    assert out.label_string() == "RLLR" and out.x == -1
    assert as_triple(out, P11) == apply_piecewise(RecTriple(-1, 1, 1), P11) == (-1, 2, 0)


def test_walk_from_rlr():
    # hand trace 0 -> -1 -> 0 -> 1 -> 2
    out, side = equilibrate_explicit(LabelState1D.from_string(-1, "RLR"), P11, check=True)
    assert side is ExitSide.RIGHT
    assert out.label_string() == "LLLR"
    assert as_triple(out, P11) == apply_piecewise(RecTriple(-1, 1, 0), P11) == (-1, 2, -1)


def test_render_layout():
    st_ = render(RecTriple(-2, 3, 1), Params1D(1, 2))
    assert st_.x == -2 and st_.label_string() == "RRRLLRR"
    assert render_list(-2, 3, 1, 2) == st_.labels.tolist()


def test_landmarks_match_turning_points():
    # check=True raises if the walk's turning points differ from the landmarks
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(1, 12))
        x = -int(rng.integers(0, n))
        state = LabelState1D(x, rng.integers(0, 2, size=n).astype(np.uint8))
        equilibrate_explicit(state, Params1D(int(rng.integers(1, 4)), int(rng.integers(1, 4))),
                             check=True)
    assert zigzag_landmarks(LabelState1D.initial())[-1] == 1


@settings(max_examples=300, deadline=None)
@given(triples(bound=25), st.integers(1, 5), st.integers(1, 5))
def test_explicit_walk_matches_closed_form(t, r, s):
    p = Params1D(r, s)
    out, side = equilibrate_explicit(render(t, p), p)
    assert as_triple(out, p) == apply_piecewise(t, p)
    assert (side is ExitSide.RIGHT) == is_plus_step(t)


@settings(max_examples=200, deadline=None)
@given(triples(bound=20), st.integers(1, 4), st.integers(1, 4))
def test_explicit_walk_matches_list_oracle(t, r, s):
    p = Params1D(r, s)
    x, labels, side = label_walk(t.x, render_list(*t, s), r, s)
    out, eside = equilibrate_explicit(render(t, p), p)
    assert (out.x, out.labels.tolist(), int(eside)) == (x, labels, side)


def test_oracle_sweep_small_box():
    assert oracle_sweep(-8, 8, Params1D(3, 2)) == (sum(y - x + 1 for x in range(-8, 1)
                                                       for y in range(0, 9)), 0)


# ---- reduction

def test_reduce_already_recurrent():
    t, n = reduce_to_recurrent(LabelState1D.initial(), P11)
    assert (t, n) == ((0, 0, 0), 0)
    t, n = reduce_to_recurrent(render(RecTriple(-3, 2, 1), Params1D(2, 3)), Params1D(2, 3))
    assert (t, n) == ((-3, 2, 1), 0)


def test_reduce_lrl():
    t, n = reduce_to_recurrent(LabelState1D.from_string(-1, "LRL"), P11)
    assert n > 0 and t.is_valid
    # once recurrent, the explicit walk keeps agreeing with the closed form
    state = render(t, P11)
    for _ in range(20):
        state, _ = equilibrate_explicit(state, P11)
        t = apply_piecewise(t, P11)
        assert as_triple(state, P11) == t


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 10).flatmap(lambda n: st.tuples(st.integers(-n + 1, 0),
                                                     st.lists(st.integers(0, 1), min_size=n,
                                                              max_size=n))),
       st.integers(1, 3), st.integers(1, 3))
def test_reduce_reaches_rec(start, r, s):
    x, labels = start
    p = Params1D(r, s)
    t, _ = reduce_to_recurrent(LabelState1D(x, np.array(labels, dtype=np.uint8)), p)
    assert t.is_valid and as_triple(render(t, p), p) == t


# ---- closed form

def test_piecewise_examples():
    assert apply_piecewise((0, 0, 0), P11) == (0, 1, 0)
    assert apply_piecewise((0, 1, 0), P11) == (-1, 1, 1)
    assert apply_piecewise((0, 0, 0), P21) == (0, 1, 0)


def test_piecewise_rejects_invalid():
    with pytest.raises(ValueError):
        apply_piecewise((1, 0, 0), P11)


def test_range_guard():
    with pytest.raises(OverflowError):
        invariant_g((-(MAX_COORD + 1), 0, 0), P11)


@settings(max_examples=500, deadline=None)
@given(triples(), params_st)
def test_invariant_conserved(t, p):
    assert invariant_g(apply_piecewise(t, p), p) == invariant_g(t, p)


@settings(max_examples=500, deadline=None)
@given(triples(), params_st)
def test_closure_and_exclusivity(t, p):
    x, y, z = t
    plus = RecTriple(x, y + p.s, z - y)
    minus = RecTriple(x - p.r, y, z - x + 1)
    assert plus.is_valid != minus.is_valid
    assert apply_piecewise(t, p) == (plus if plus.is_valid else minus)
    assert apply_piecewise(t, p) == piecewise(x, y, z, p.r, p.s)


@settings(max_examples=100, deadline=None)
@given(triples(bound=10), params_st)
def test_iterate_matches_orbit_and_growth(t, p):
    n = 10 * (abs(t.x) + t.y + p.r + p.s) ** 2
    traj, bits = orbit_arrays(t, p, n)
    assert tuple(traj[-1]) == iterate(t, p, n)
    dx, dy = np.diff(traj[:, 0]), np.diff(traj[:, 1])
    assert set(dx.tolist()) <= {0, -p.r} and set(dy.tolist()) <= {0, p.s}
    assert np.array_equal(bits, (dy != 0).astype(bits.dtype))
    assert traj[-1, 0] < t.x and traj[-1, 1] > t.y


def test_invariant_examples():
    assert invariant_g((-3, 0, 0), P11) == 12
    assert invariant_g((0, 0, 0), P21) == 0
    assert invariant_g((-1, 1, 1), P11) == 0 == invariant_g((-1, 2, 0), P11)


def test_z_from_invariant_examples():
    assert z_from_invariant(0, 1, 0, P21) == 0
    assert z_from_invariant(-3, 0, 12, P11) == 0
    assert z_from_invariant(-1, 0, 1, P11) is None


@settings(max_examples=300, deadline=None)
@given(triples(), params_st)
def test_z_round_trip(t, p):
    assert z_from_invariant(t.x, t.y, invariant_g(t, p), p) == t.z


# ---- spaced intervals and orbits

def test_recurrent_interval_examples():
    assert recurrent_interval(1, 0, 0, P11) == (-1, 0)
    assert recurrent_interval(0, 0, 0, P11) == (0, 0)
    brute = [x for x in range(0, -21, -2) if z_from_invariant(x, 2, 0, P21) is not None]
    assert recurrent_interval(2, 0, 0, P21) == (min(brute), max(brute))


def test_recurrent_interval_empty():
    with pytest.raises(EmptyIntervalError):
        recurrent_interval(0, 1, 0, P11)


@pytest.mark.parametrize("rs", [(1, 1), (2, 1), (2, 3), (3, 2)])
def test_interval_endpoints_along_orbit(rs):
    p = Params1D(*rs)
    traj, _ = orbit_arrays(RecTriple(0, 0, 0), p, 400)
    ys = sorted({int(v) for v in traj[:, 1]})
    for y in ys[:-1]:
        lo, hi = recurrent_interval(y, 0, 0, p)
        lo2, hi2 = recurrent_interval(y + p.s, 0, 0, p)
        assert hi2 <= hi
        assert lo == hi2


def test_same_orbit_examples():
    assert same_orbit((0, 1, 0), (-1, 1, 1), P11)
    assert not same_orbit((0, 0, 0), (-1, 0, 0), P21)
    assert not same_orbit((0, 0, 0), (-1, 0, -1), P21)
    assert not same_orbit((0, 0, 0), (-3, 0, 0), P11)


@settings(max_examples=200, deadline=None)
@given(triples(), params_st, st.integers(0, 200))
def test_orbit_key_constant(t, p, n):
    assert orbit_key(iterate(t, p, n), p) == orbit_key(t, p)
