import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chromatic_mh import ColoringError, ValidationError, build_partition, color_partition, make_partition, markov_blanket
from chromatic_mh.partition import signal_window


def spans(p):
    return [(r.lo, r.hi) for r in p.regions]


def test_four_regions():
    p = build_partition(240, 60)
    assert spans(p) == [(0, 60), (60, 120), (120, 180), (180, 240)]
    assert p.regions[-1].closed and not p.regions[0].closed


def test_offset_regions():
    p = build_partition(240, 60, 25)
    assert spans(p) == [(0, 25), (25, 85), (85, 145), (145, 205), (205, 240)]


def test_single_region():
    p = build_partition(240, 240)
    assert spans(p) == [(0, 240)]
    assert p.region_index(240) == 0


@pytest.mark.parametrize("l,u", [(0, 0), (300, 0), (60, 60), (60, -1), (float("nan"), 0)])
def test_invalid(l, u):
    with pytest.raises(ValidationError):
        build_partition(240, l, u)


def test_boundary_event_goes_right():
    p = build_partition(240, 60)
    assert p.region_index(60.0) == 1
    assert p.region_index(59.999) == 0
    assert p.region_index(240.0) == 3
    assert p.regions[1].contains(60.0) and not p.regions[0].contains(60.0)


def test_two_colors():
    assert make_partition(240, 60, 50).colors == (0, 1, 0, 1)


def test_three_colors():
    p = make_partition(240, 30, 50)
    assert p.colors[:4] == (0, 1, 2, 0)
    assert p.n_colors == 3


def test_too_short_regions():
    with pytest.raises(ColoringError):
        make_partition(240, 20, 50)


def test_signal_window():
    p = build_partition(240, 60)
    assert signal_window(p.regions[0], 50, 240, 1.0) == (0, 110)
    assert signal_window(p.regions[3], 50, 240, 1.0) == (180, 240)
    assert signal_window(p.regions[1], 0, 240, 1.0) == (60, 120)
    assert signal_window(p.regions[1], 50, 240, 2.0) == (120, 340)


def test_markov_blanket():
    p = make_partition(240, 60, 50)
    assert markov_blanket(1, p, 50, 240)[0] == (0, 2)
    assert markov_blanket(0, p, 50, 240)[0] == (1,)
    assert markov_blanket(0, make_partition(240, 240, 50), 50, 240)[0] == ()
    # signal blocks: region 1's window [60, 170) touches blocks 1 and 2, plus block 0's lookahead
    assert set(markov_blanket(1, p, 50, 240)[1]) >= {1, 2}
    with pytest.raises(IndexError):
        markov_blanket(4, p, 50, 240)


FRACTIONS = [0, 1 / 7, 1 / 3, 1 / 2, 0.99]


@pytest.mark.parametrize("l", [25, 30, 40, 50, 60, 80, 120, 240])
@pytest.mark.parametrize("frac", FRACTIONS)
def test_coloring_invariants(l, frac):
    T, tau = 240, 50
    p = make_partition(T, l, tau, frac * l)
    regions = p.regions
    assert sum(r.length for r in regions) == pytest.approx(T)
    assert all(a < b for a, b in zip(p.boundaries, p.boundaries[1:]))
    for i in range(len(regions) - 1):
        assert p.colors[i] != p.colors[i + 1]
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            if p.colors[i] == p.colors[j]:
                assert regions[j].lo - regions[i].hi >= tau - 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(25, 240), st.floats(0, 0.999), st.floats(0, 240))
def test_every_time_in_exactly_one_region(l, frac, t):
    p = build_partition(240, l, frac * l)
    owners = [i for i, r in enumerate(p.regions) if r.contains(t)]
    assert owners == [p.region_index(t)]
