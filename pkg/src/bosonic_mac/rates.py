"""Closed-form rate regions of the pure-interference bosonic MAC.

All logarithms are base 2 and every rate is in bits per channel use. A
region ``(r1_max, r2_max, sum_max)`` stands for the pentagon

    R1 <= r1_max,  R2 <= r2_max,  R1 + R2 <= sum_max,  R1, R2 >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

# Absolute slack on the two inequalities that decide region equality.
CONDITION_SLACK = 1e-12
# Relative tolerance on polygon vertex coordinates.
VERTEX_RTOL = 1e-9
_VERTEX_ATOL = 1e-12


@dataclass(frozen=True)
class ChannelParams:
    """Transmissivity and the two senders' mean photon budgets."""

    eta: float
    nsa: float
    nsb: float

    def __post_init__(self):
        for name in ("eta", "nsa", "nsb"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must lie in [0, 1], got {self.eta}")
        if self.nsa < 0 or self.nsb < 0:
            raise ValueError(f"photon numbers must be >= 0, got nsa={self.nsa}, nsb={self.nsb}")

    @property
    def received_a(self) -> float:
        """Mean photon number of sender A reaching the receiver."""
        return self.eta * self.nsa

    @property
    def received_b(self) -> float:
        return (1.0 - self.eta) * self.nsb

    @property
    def n_prime(self) -> float:
        """Total mean photon number at the output port."""
        return self.received_a + self.received_b

    def as_dict(self) -> dict:
        return {"eta": self.eta, "nsa": self.nsa, "nsb": self.nsb}


@dataclass(frozen=True)
class RateRegion:
    r1_max: float
    r2_max: float
    sum_max: float

    def __post_init__(self):
        if min(self.r1_max, self.r2_max, self.sum_max) < 0:
            raise ValueError(f"rate bounds must be nonnegative: {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.r1_max, self.r2_max, self.sum_max)

    def contains(self, r1: float, r2: float, atol: float = 1e-12) -> bool:
        return (
            -atol <= r1 <= self.r1_max + atol
            and -atol <= r2 <= self.r2_max + atol
            and r1 + r2 <= self.sum_max + atol
        )


@dataclass(frozen=True)
class EntropySet:
    h_b: float
    h_b_given_x: float
    h_b_given_y: float
    hmin_b_given_x: float
    hmin_b_given_y: float


@dataclass(frozen=True)
class PolygonRegion:
    """Convex polygon in the (R1, R2) plane, counterclockwise from the origin."""

    vertices: tuple[tuple[float, float], ...]

    def __len__(self):
        return len(self.vertices)

    def max_sum_rate(self) -> float:
        return max(r1 + r2 for r1, r2 in self.vertices)

    def contains_point(self, r1: float, r2: float, atol: float = 1e-12) -> bool:
        """Half-plane test against every edge of the polygon."""
        vs = self.vertices
        if len(vs) == 1:
            return abs(r1 - vs[0][0]) <= atol and abs(r2 - vs[0][1]) <= atol
        if len(vs) == 2:
            (x0, y0), (x1, y1) = vs
            t = ((r1 - x0) * (x1 - x0) + (r2 - y0) * (y1 - y0)) / ((x1 - x0) ** 2 + (y1 - y0) ** 2)
            t = min(1.0, max(0.0, t))
            return math.hypot(r1 - x0 - t * (x1 - x0), r2 - y0 - t * (y1 - y0)) <= atol
        for (x0, y0), (x1, y1) in zip(vs, vs[1:] + vs[:1]):
            if (x1 - x0) * (r2 - y0) - (y1 - y0) * (r1 - x0) < -atol:
                return False
        return True

    def contains_polygon(self, other: "PolygonRegion", atol: float = 1e-12) -> bool:
        return all(self.contains_point(x, y, atol) for x, y in other.vertices)


def g_function(x: float) -> float:
    """Entropy in bits of a thermal state with mean photon number ``x``.

    ``g(x) = (x + 1) log2(x + 1) - x log2(x)``, with ``g(0) = 0``.
    """
    x = float(x)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"g is defined for finite x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0
    # same as (x+1) log2(x+1) - x log2 x, without the cancellation at large x
    tail = math.log1p(1.0 / x) if x >= 1.0 else math.log1p(x) - math.log(x)
    return math.log1p(x) / math.log(2.0) + x * tail / math.log(2.0)


def entropies(p: ChannelParams) -> EntropySet:
    """Entropies of the Gaussian coherent-state ensemble at the receiver."""
    return EntropySet(
        h_b=g_function(p.n_prime),
        h_b_given_x=g_function(p.received_b),
        h_b_given_y=g_function(p.received_a),
        hmin_b_given_x=math.log2(p.received_b + 1.0),
        hmin_b_given_y=math.log2(p.received_a + 1.0),
    )


def yen_shapiro_region(p: ChannelParams) -> RateRegion:
    """Coherent-state capacity region (Holevo joint detection)."""
    return RateRegion(g_function(p.received_a), g_function(p.received_b), g_function(p.n_prime))


def seq_regions(p: ChannelParams) -> tuple[RateRegion, RateRegion]:
    """The two min-entropy regions reachable by sequential decoding.

    The first smooths with sender A's conditional typical projector and so
    pays a min-entropy penalty on R1; the second is the mirror image.
    """
    e = entropies(p)
    first = RateRegion(e.hmin_b_given_y, e.h_b_given_x, e.h_b)
    second = RateRegion(e.h_b_given_y, e.hmin_b_given_x, e.h_b)
    return first, second


def full_vn_region(p: ChannelParams) -> RateRegion:
    """Region with von Neumann entropies on every constraint.

    For this channel it coincides with :func:`yen_shapiro_region`; it is kept
    under its own name because it is computed from the entropy set rather
    than from the capacity formula.
    """
    e = entropies(p)
    return RateRegion(e.h_b_given_y, e.h_b_given_x, e.h_b)


def equality_conditions(p: ChannelParams) -> bool:
    """True when the hull of the two sequential regions is the full capacity region."""
    e = entropies(p)
    first = e.h_b - e.h_b_given_x <= e.hmin_b_given_y + CONDITION_SLACK
    second = e.h_b - e.h_b_given_y <= e.hmin_b_given_x + CONDITION_SLACK
    return first and second


def equality_map(eta: float, ns_grid: Iterable[tuple[float, float]]) -> list[tuple[float, float, bool]]:
    return [(nsa, nsb, equality_conditions(ChannelParams(eta, nsa, nsb))) for nsa, nsb in ns_grid]


BASELINE_KINDS = ("heterodyne", "homodyne")


def baseline_region(p: ChannelParams, kind: str) -> RateRegion:
    """Gaussian-MAC region for a conventional receiver (heterodyne or homodyne).

    Heterodyne sees a complex AWGN MAC with unit noise per complex sample;
    homodyne sees one real quadrature with noise variance 1/4 and the senders
    concentrating their power in that quadrature. See ``docs/baselines.md``.
    """
    a, b, tot = p.received_a, p.received_b, p.n_prime
    if kind == "heterodyne":
        return RateRegion(math.log2(1 + a), math.log2(1 + b), math.log2(1 + tot))
    if kind == "homodyne":
        return RateRegion(
            0.5 * math.log2(1 + 4 * a), 0.5 * math.log2(1 + 4 * b), 0.5 * math.log2(1 + 4 * tot)
        )
    raise ValueError(f"unknown baseline kind {kind!r}; expected one of {BASELINE_KINDS}")


# -- geometry ---------------------------------------------------------------


def _dedupe(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for pt in points:
        if not out or not _same_point(out[-1], pt):
            out.append(pt)
    while len(out) > 1 and _same_point(out[0], out[-1]):
        out.pop()
    return out


def _same_point(a, b) -> bool:
    return all(math.isclose(u, v, rel_tol=VERTEX_RTOL, abs_tol=_VERTEX_ATOL) for u, v in zip(a, b))


def region_geometry(r: RateRegion) -> PolygonRegion:
    r1, r2 = r.r1_max, r.r2_max
    s = min(r.sum_max, r1 + r2)
    pts = [(0.0, 0.0), (min(r1, s), 0.0)]
    if s - r1 >= 0:
        pts.append((r1, s - r1))
    if s - r2 >= 0:
        pts.append((s - r2, r2))
    pts.append((0.0, min(r2, s)))
    return PolygonRegion(tuple(_dedupe(pts)))


def convex_hull(points: Iterable[tuple[float, float]]) -> PolygonRegion:
    """Monotone-chain hull; collinear and duplicate points are dropped."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return PolygonRegion(tuple(_dedupe(pts)))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def tol(o, a, b):
        scale = max(1.0, *(abs(c) for c in (*o, *a, *b)))
        return 1e-12 * scale * scale

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= tol(lower[-2], lower[-1], p):
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= tol(upper[-2], upper[-1], p):
            upper.pop()
        upper.append(p)
    return PolygonRegion(tuple(_dedupe(lower[:-1] + upper[:-1])))


def hull_region(a: RateRegion, b: RateRegion) -> PolygonRegion:
    """Time-sharing region: convex hull of the union of two pentagons."""
    return convex_hull(region_geometry(a).vertices + region_geometry(b).vertices)


def polygons_equal(a: PolygonRegion, b: PolygonRegion, rtol: float = VERTEX_RTOL) -> bool:
    """Vertex-wise comparison after putting both polygons in canonical hull form."""
    ca, cb = convex_hull(a.vertices), convex_hull(b.vertices)
    if len(ca) != len(cb):
        return False
    return all(
        math.isclose(u, v, rel_tol=rtol, abs_tol=_VERTEX_ATOL)
        for pa, pb in zip(ca.vertices, cb.vertices)
        for u, v in zip(pa, pb)
    )
