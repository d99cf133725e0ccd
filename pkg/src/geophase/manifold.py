"""Charts, atlases and fibre-bundle bookkeeping.

Manifolds are products of intervals and circles.  A chart is an open box in
coordinates; a circle coordinate belongs to a chart when *some*
representative ``x + m * period`` lies inside the box, and that representative
is the chart coordinate.

Torsion functions follow the convention ``phi[a, b](x, y)``: the fibre
coordinate of a point expressed in chart ``b`` mapped to its coordinate in
chart ``a``.  Group transition functions ``g[a, b](x)`` act on column frames,
``Z_b = Z_a @ g[a, b]``.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, StepTooCoarse, ValidationError


@dataclass(frozen=True)
class Chart:
    name: str
    lower: tuple
    upper: tuple

    @property
    def ndim(self):
        return len(self.lower)


@dataclass(frozen=True)
class Atlas:
    """A finite cover of a product of intervals and circles by open boxes.

    ``periods[i]`` is ``None`` for an interval coordinate.  ``overlaps``
    holds ``(a, b, shift)`` with ``shift = l_b - l_a`` on that overlap.
    """

    charts: tuple
    periods: tuple
    overlaps: tuple = ()
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    @property
    def ndim(self):
        return len(self.periods)

    @property
    def names(self):
        return [c.name for c in self.charts]

    def chart(self, name):
        for c in self.charts:
            if c.name == name:
                return c
        raise KeyError(name)

    def coordinates(self, name, point):
        """Chart coordinates of ``point`` in chart ``name``, or None if outside."""
        c = self.chart(name)
        point = np.atleast_1d(np.asarray(point, dtype=float))
        out = np.empty_like(point)
        for i, (x, lo, hi, per) in enumerate(zip(point, c.lower, c.upper, self.periods)):
            if per is None:
                if not lo < x < hi:
                    return None
                out[i] = x
            else:
                # smallest representative above lo
                rep = x + per * np.ceil((lo - x) / per)
                if rep == lo:
                    rep += per
                if not rep < hi:
                    return None
                out[i] = rep
        return out

    def contains(self, name, point):
        return self.coordinates(name, point) is not None

    def margin(self, name, point):
        """Distance from ``point`` to the boundary of chart ``name`` (-inf if outside)."""
        coords = self.coordinates(name, point)
        if coords is None:
            return -np.inf
        c = self.chart(name)
        return float(min(min(x - lo, hi - x) for x, lo, hi in zip(coords, c.lower, c.upper)))

    def charts_at(self, point):
        return [c.name for c in self.charts if self.contains(c.name, point)]

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "periods": list(self.periods),
            "charts": [{"name": c.name, "lower": list(c.lower), "upper": list(c.upper)} for c in self.charts],
            "overlaps": [[a, b, s] for a, b, s in self.overlaps],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("kind") == "circle":
            return circle_atlas(**d["params"])
        charts = tuple(Chart(c["name"], tuple(c["lower"]), tuple(c["upper"])) for c in d["charts"])
        return cls(charts, tuple(d["periods"]), tuple(tuple(o) for o in d.get("overlaps", ())),
                   d.get("kind", "custom"), dict(d.get("params", {})))


def circle_atlas(epsilon=0.1):
    """Three-chart atlas of the circle with overlaps of half-width ``epsilon``."""
    if not 0 < epsilon < np.pi / 4:
        raise ValidationError("epsilon must lie in (0, pi/4)")
    e = float(epsilon)
    charts = (
        Chart("1", (-e,), (np.pi + e,)),
        Chart("2", (np.pi - e,), (1.5 * np.pi + e,)),
        Chart("3", (1.5 * np.pi - e,), (2 * np.pi + e,)),
    )
    overlaps = (("1", "2", 0.0), ("2", "3", 0.0), ("1", "3", 2 * np.pi))
    return Atlas(charts, (2 * np.pi,), overlaps, kind="circle", params={"epsilon": e})


def check_cover(atlas, n=2001, bounds=None):
    """Sample the manifold on a grid and report whether every point is covered.

    ``bounds`` gives ``(lo, hi)`` per interval coordinate; circle coordinates
    are sampled over one period.
    """
    axes = []
    for i, per in enumerate(atlas.periods):
        if per is None:
            lo, hi = bounds[i]
            axes.append(np.linspace(lo, hi, n)[1:-1])
        else:
            axes.append(np.linspace(0.0, per, n, endpoint=False))
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, atlas.ndim)
    return all(atlas.charts_at(p) for p in grid)


def check_overlaps(atlas, n=2001):
    """Verify ``l_b - l_a`` equals the declared shift on sampled overlap points."""
    for a, b, shift in atlas.overlaps:
        ca, cb = atlas.chart(a), atlas.chart(b)
        lo = np.minimum(ca.lower, cb.lower)
        hi = np.maximum(ca.upper, cb.upper)
        for p in np.linspace(lo, hi, n):
            la, lb = atlas.coordinates(a, p), atlas.coordinates(b, p)
            if la is not None and lb is not None and not np.allclose(lb - la, shift, atol=1e-12):
                return False
    return True


def triple_overlap_points(atlas, n=4001):
    """Sampled points lying in at least three charts (empty array if none)."""
    if atlas.ndim != 1:
        raise ValidationError("triple overlap sampling implemented for 1-d atlases")
    per = atlas.periods[0]
    if per is None:
        lo = min(c.lower[0] for c in atlas.charts)
        hi = max(c.upper[0] for c in atlas.charts)
        xs = np.linspace(lo, hi, n)
    else:
        xs = np.linspace(0.0, per, n, endpoint=False)
    return np.array([x for x in xs if len(atlas.charts_at(x)) >= 3])


class BundleAtlas:
    """Torsion and transition functions of a bundle over an atlas.

    Missing reverse transitions are filled by the conjugate transpose; missing
    torsions are a configuration error because general fibre maps cannot be
    inverted here.
    """

    def __init__(self, atlas, torsion=None, transition=None, n_a=1):
        self.atlas = atlas
        self.n_a = n_a
        self._torsion = dict(torsion or {})
        self._transition = dict(transition or {})

    def torsion(self, a, b):
        if a == b:
            return lambda x, y: y
        try:
            return self._torsion[(a, b)]
        except KeyError:
            raise ConfigError(f"no torsion function for charts ({a}, {b})") from None

    def transition(self, a, b):
        if a == b:
            return lambda x: np.eye(self.n_a, dtype=complex)
        if (a, b) in self._transition:
            return self._transition[(a, b)]
        if (b, a) in self._transition:
            g = self._transition[(b, a)]
            return lambda x: np.conj(np.asarray(g(x))).T
        raise ConfigError(f"no transition function for charts ({a}, {b})")

    def has_transition(self, a, b):
        return a == b or (a, b) in self._transition or (b, a) in self._transition


def moebius_bundle(atlas, n_a=1):
    """Infinite Moebius strip over the three-chart circle atlas.

    The fibre coordinate flips sign between charts 1 and 3; the group
    transition functions are trivial.
    """
    if atlas.kind != "circle":
        raise ValidationError("moebius_bundle needs the three-chart circle atlas")
    ident = lambda x, y: y
    flip = lambda x, y: -y
    torsion = {
        ("1", "2"): ident, ("2", "1"): ident,
        ("2", "3"): ident, ("3", "2"): ident,
        ("1", "3"): flip, ("3", "1"): flip,
    }
    one = lambda x: np.eye(n_a, dtype=complex)
    transition = {("1", "2"): one, ("2", "3"): one, ("1", "3"): one}
    return BundleAtlas(atlas, torsion, transition, n_a)


def check_cocycle(bundle, points, fibre_samples=(-1.3, 0.0, 0.7), tol=1e-10):
    """Check ``phi_ab . phi_bc = phi_ac`` and ``g_ab g_bc = g_ac`` at ``points``
    for every triple of charts containing the point.  Vacuous without triple
    overlaps."""
    atlas = bundle.atlas
    for p in points:
        names = atlas.charts_at(p)
        for a in names:
            for b in names:
                for c in names:
                    if len({a, b, c}) < 3:
                        continue
                    for y in fibre_samples:
                        lhs = bundle.torsion(a, b)(p, bundle.torsion(b, c)(p, y))
                        if abs(lhs - bundle.torsion(a, c)(p, y)) > tol:
                            return False
                    gab = bundle.transition(a, b)(p)
                    gbc = bundle.transition(b, c)(p)
                    if np.max(np.abs(gab @ gbc - bundle.transition(a, c)(p))) > tol:
                        return False
    return True


@dataclass(frozen=True)
class Crossing:
    """Chart change ``src -> dst``; ``index`` is the first sample in ``dst``
    (``len(path)`` for the closing crossing of a loop)."""

    index: int
    time: float
    src: str
    dst: str


@dataclass(frozen=True)
class ChartedPath:
    times: np.ndarray
    points: np.ndarray
    charts: tuple
    coords: np.ndarray
    crossings: tuple
    closed: bool = False

    def __len__(self):
        return len(self.times)

    def point_at(self, index):
        return self.points[min(index, len(self.points) - 1)]


def _same_point(atlas, p, q, tol=1e-9):
    d = np.atleast_1d(np.asarray(p, float) - np.asarray(q, float))
    for i, per in enumerate(atlas.periods):
        if per is not None:
            d[i] = (d[i] + per / 2) % per - per / 2
    return bool(np.all(np.abs(d) < tol))


def chart_route(times, points, atlas, closed=False):
    """Assign a chart to each path sample, staying in the current chart for as
    long as possible.

    Parameters
    ----------
    times : (n,) array_like
        Strictly increasing sample times.
    points : (n,) or (n, d) array_like
        Base-manifold coordinates.
    closed : bool
        Declare the path a loop.  The end point must coincide with the start;
        if the route ends in a different chart, a closing crossing back into
        the starting chart is recorded.
    """
    times = np.asarray(times, dtype=float)
    points = np.asarray(points, dtype=float).reshape(len(times), -1)
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")

    def best(p, candidates):
        return max(candidates, key=lambda n: atlas.margin(n, p))

    first = atlas.charts_at(points[0])
    if not first:
        raise ValidationError("path starts outside the atlas")
    current = best(points[0], first)
    charts = [current]
    coords = [atlas.coordinates(current, points[0])]
    crossings = []
    for k in range(1, len(times)):
        p = points[k]
        if not atlas.contains(current, p):
            shared = [n for n in atlas.charts_at(p) if atlas.contains(n, points[k - 1])]
            if not shared:
                raise StepTooCoarse(k, "consecutive samples share no chart")
            new = best(p, shared)
            crossings.append(Crossing(k, float(times[k]), current, new))
            current = new
        charts.append(current)
        coords.append(atlas.coordinates(current, p))

    if closed:
        if not _same_point(atlas, points[0], points[-1]):
            raise ValidationError("closed path must end where it starts")
        if current != charts[0]:
            crossings.append(Crossing(len(times), float(times[-1]), current, charts[0]))
    return ChartedPath(times, points, tuple(charts), np.array(coords), tuple(crossings), closed)


def fibre_monodromy(bundle, loop, fibre_value):
    """Transport a fibre coordinate around a closed charted loop by composing
    torsion functions at every chart crossing."""
    if not loop.closed:
        raise ValidationError("fibre_monodromy needs a closed loop")
    y = fibre_value
    for c in loop.crossings:
        y = bundle.torsion(c.dst, c.src)(loop.point_at(c.index), y)
    return y
