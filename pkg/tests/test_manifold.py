import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geophase.errors import ConfigError, StepTooCoarse, ValidationError
from geophase.manifold import (Atlas, BundleAtlas, Chart, chart_route, check_cocycle, check_cover, check_overlaps,
                               circle_atlas, fibre_monodromy, moebius_bundle, triple_overlap_points)


def loop(turns=1, n=400):
    t = np.linspace(0, 1, n * turns + 1)
    return t, 2 * np.pi * turns * t


def test_circle_atlas_covers_and_overlaps():
    atlas = circle_atlas(0.1)
    assert atlas.names == ["1", "2", "3"]
    assert check_cover(atlas)
    assert check_overlaps(atlas)
    assert len(triple_overlap_points(atlas)) == 0
    # chart 3 sees angle 0 as 2 pi, chart 1 as 0
    assert atlas.coordinates("3", 0.05)[0] == pytest.approx(2 * np.pi + 0.05)
    assert atlas.coordinates("1", 0.05)[0] == pytest.approx(0.05)
    assert atlas.charts_at(np.pi) == ["1", "2"]
    assert atlas.margin("2", 0.0) == -np.inf


@pytest.mark.parametrize("eps", [0.0, -0.1, np.pi / 4, 1.0])
def test_circle_atlas_rejects_bad_epsilon(eps):
    with pytest.raises(ValidationError):
        circle_atlas(eps)


def test_atlas_dict_round_trip():
    atlas = circle_atlas(0.2)
    assert Atlas.from_dict(atlas.to_dict()) == atlas
    custom = Atlas((Chart("a", (0.0,), (1.0,)),), (None,))
    assert Atlas.from_dict(custom.to_dict()) == custom


def test_cocycle_vacuous_without_triple_overlaps():
    atlas = circle_atlas(0.1)
    bundle = moebius_bundle(atlas)
    assert check_cocycle(bundle, np.linspace(0, 2 * np.pi, 200))


def test_cocycle_detects_inconsistent_torsion():
    charts = (Chart("a", (0.0,), (3.0,)), Chart("b", (0.0,), (3.0,)), Chart("c", (0.0,), (3.0,)))
    atlas = Atlas(charts, (None,))
    ident, flip = (lambda x, y: y), (lambda x, y: -y)
    one = lambda x: np.eye(1)
    trans = {("a", "b"): one, ("b", "c"): one, ("a", "c"): one}
    tors = {(p, q): ident for p in "abc" for q in "abc" if p != q}
    assert check_cocycle(BundleAtlas(atlas, tors, trans), [1.0])
    tors[("a", "c")] = flip
    assert not check_cocycle(BundleAtlas(atlas, tors, trans), [1.0])
    tors[("a", "c")] = ident
    trans[("a", "c")] = lambda x: -np.eye(1)
    assert not check_cocycle(BundleAtlas(atlas, tors, trans), [1.0])


def test_route_crossings_of_one_turn():
    atlas = circle_atlas(0.1)
    t, th = loop()
    route = chart_route(t, th, atlas, closed=True)
    assert route.charts[0] == "1" and route.charts[-1] == "3"
    assert [(c.src, c.dst) for c in route.crossings] == [("1", "2"), ("2", "3"), ("3", "1")]
    assert route.crossings[-1].index == len(route)
    # chart coordinates are continuous inside each chart
    jumps = np.abs(np.diff(route.coords[:, 0]))
    assert jumps.max() < 0.1


@settings(max_examples=20, deadline=None)
@given(turns=st.integers(1, 4), y=st.floats(-10, 10, allow_nan=False))
def test_moebius_monodromy_sign(turns, y):
    atlas = circle_atlas(0.1)
    t, th = loop(turns, 60)
    route = chart_route(t, th, atlas, closed=True)
    assert fibre_monodromy(moebius_bundle(atlas), route, y) == (-1) ** turns * y


def test_backtracking_loop_has_no_monodromy():
    atlas = circle_atlas(0.1)
    t = np.linspace(0, 1, 201)
    th = 0.9 * np.pi * np.sin(2 * np.pi * t)
    route = chart_route(t, th, atlas, closed=True)
    assert fibre_monodromy(moebius_bundle(atlas), route, 1.5) == 1.5


def test_route_errors():
    atlas = circle_atlas(0.1)
    with pytest.raises(StepTooCoarse):
        chart_route([0, 1], [0.5, 0.5 + np.pi * 1.2], atlas)
    with pytest.raises(ValidationError):
        chart_route([0, 1, 2], [0.0, 1.0, 2.0], atlas, closed=True)
    with pytest.raises(ValidationError):
        chart_route([1, 0], [0.0, 0.1], atlas)
    t, th = loop()
    open_route = chart_route(t, th, atlas)
    with pytest.raises(ValidationError):
        fibre_monodromy(moebius_bundle(atlas), open_route, 1.0)


def test_missing_functions_are_config_errors():
    atlas = circle_atlas(0.1)
    bundle = BundleAtlas(atlas, {}, {("1", "2"): lambda x: np.array([[1j]])})
    with pytest.raises(ConfigError):
        bundle.torsion("1", "2")
    with pytest.raises(ConfigError):
        bundle.transition("1", "3")
    # reverse transition is the inverse
    assert bundle.transition("2", "1")(0.0)[0, 0] == pytest.approx(-1j)
    assert bundle.torsion("2", "2")(0.0, 4.0) == 4.0
