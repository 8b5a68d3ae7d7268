import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotorrouter.lattice import DirectionOrdering, Grid


def test_parse_and_names():
    o = DirectionOrdering.parse("1,2,-1,-2")
    assert o.dim == 2 and o.order == (1, 2, -1, -2)
    assert DirectionOrdering.cyclic(2).order == o.order
    assert DirectionOrdering.axial(2).order == (1, -1, 2, -2)
    assert DirectionOrdering.named("axial", 3).order == (1, -1, 2, -2, 3, -3)
    assert DirectionOrdering.named("2,1,-2,-1", 2).order == (2, 1, -2, -1)
    assert str(o) == "1,2,-1,-2"


@pytest.mark.parametrize("text", ["1,1,-1,-2", "1,2,-1", "1,2,-1,-3", "a,b", "1,2,3,-1,-2,-4"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        DirectionOrdering.parse(text)


def test_conventions_flag():
    assert DirectionOrdering.cyclic(3).conventional
    assert DirectionOrdering.axial(3).conventional
    assert not DirectionOrdering.parse("2,1,-1,-2").conventional
    assert not DirectionOrdering.parse("-1,2,1,-2").conventional


def test_grid_index_round_trip():
    g = Grid(3, 4)
    pts = np.array([[0, 0, 0], [4, -4, 1], [-3, 2, 4]])
    idx = [g.index(p) for p in pts]
    assert np.array_equal(g.coords(np.array(idx)), pts)
    assert g.index((0, 0, 0)) == g.origin
    with pytest.raises(IndexError):
        g.index((5, 0, 0))


def test_offsets_follow_ordering():
    g = Grid(2, 3)
    o = DirectionOrdering.parse("2,-1,1,-2")
    for k, token in enumerate(o.order):
        target = o.vector(token)
        assert g.origin + g.offsets(o)[k] == g.index(target)


def test_margin_and_embed():
    g = Grid(2, 3)
    m = g.margin(1).reshape(g.shape)
    assert m[0].all() and m[-1].all() and m[:, 0].all() and not m[1:-1, 1:-1].any()
    a = np.arange(g.size, dtype=np.int64)
    big = g.enlarged(6)
    b = g.embed(a, big)
    for p in [(0, 0), (3, -3), (-2, 1)]:
        assert b[big.index(p)] == a[g.index(p)]
    assert b.sum() == a.sum()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3), st.integers(2, 5), st.data())
def test_shift_add(dim, half, data):
    g = Grid(dim, half)
    token = data.draw(st.sampled_from([k for k in range(1, dim + 1)] + [-k for k in range(1, dim + 1)]))
    src = np.zeros(g.size, dtype=np.int64)
    p = tuple(data.draw(st.integers(-half + 1, half - 1)) for _ in range(dim))
    src[g.index(p)] = 7
    dest = np.zeros(g.size, dtype=np.int64)
    g.shift_add(dest, src, token)
    q = list(p)
    q[abs(token) - 1] += 1 if token > 0 else -1
    assert dest[g.index(q)] == 7 and dest.sum() == 7
