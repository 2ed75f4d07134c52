"""Source scenes: 2D regions, amplitude laws, and exact ground-truth geometry.

A scene is a list of (region, amplitude) components.  Regions are closed
bounded subsets of the plane built from polygons, annuli (disks when the
inner radius is zero), boolean combinations, and implicit inequalities
g(y) <= 0.  The module also exposes the exact geometric quantities that
the reconstruction stages are later asked to recover: line/support
intersections, circle tangent offsets, and the slope-jump factor of a
polygon corner seen from a scan direction.

Conventions
-----------
* A direction ``xhat`` is a unit vector; ``perp(xhat)`` is ``xhat`` rotated
  counter-clockwise by pi/2.  The scan line at offset ``s`` is
  ``{s*xhat + tau*perp(xhat)}``.
* Membership is boundary-inclusive: points on the boundary count as
  inside.  (Quadrature weight on the boundary is measure zero, so the
  convention is inert numerically.)
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

BOUNDARY_EPS = 1e-12
DISJOINT_SAMPLES = 10_000
BISECT_TOL = 1e-10


def perp(xhat: np.ndarray) -> np.ndarray:
    """Rotate a 2-vector counter-clockwise by pi/2."""
    return np.array([-xhat[1], xhat[0]])


def _check_unit(xhat) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape != (2,) or abs(float(xhat @ xhat) - 1.0) > 1e-9:
        raise ValueError(f"direction must be a 2D unit vector, got {xhat!r}")
    return xhat


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------
class Region:
    """Base class for bounded plane regions."""

    def contains(self, point) -> bool:
        """Boundary-inclusive membership test for a single point."""
        x, y = float(point[0]), float(point[1])
        return bool(self.mask(np.array([x]), np.array([y]))[0])

    def mask(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Vectorized membership over coordinate arrays of equal shape."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, y_lo, y_hi); must be finite for a valid region."""
        raise NotImplementedError

    def line_intervals(self, xhat: np.ndarray, s: float) -> list[tuple[float, float]]:
        """Ordered tau-intervals of the scan line's intersection with the region."""
        raise NotImplementedError

    def validate(self) -> None:
        box = self.bounding_box()
        if not all(np.isfinite(box)):
            raise ValueError(f"{type(self).__name__} is unbounded: bbox={box}")


@dataclass(frozen=True)
class Polygon(Region):
    """Simple polygon, vertices in counter-clockwise order, implicitly closed."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
            raise ValueError("polygon needs >= 3 two-dimensional vertices")
        area = _signed_area(v)
        if abs(area) < 1e-12:
            raise ValueError("degenerate polygon: zero area")
        if area < 0:
            raise ValueError("polygon vertices must be counter-clockwise")
        if _self_intersects(v):
            raise ValueError("polygon is self-intersecting")
        object.__setattr__(self, "_v", v)

    @property
    def vertex_array(self) -> np.ndarray:
        return self._v

    def bounding_box(self):
        v = self._v
        return (v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max())

    def mask(self, xs, ys):
        v = self._v
        n = len(v)
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        on_edge = np.zeros(x.shape, dtype=bool)
        for i in range(n):
            ax, ay = v[i]
            bx, by = v[(i + 1) % n]
            # crossing-number ray cast along +x
            cond = (ay > y) != (by > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (y - ay) / (by - ay)
                xi = ax + t * (bx - ax)
            inside ^= cond & (x < xi)
            # boundary-inclusive: distance to segment
            ex, ey = bx - ax, by - ay
            ee = ex * ex + ey * ey
            tt = np.clip(((x - ax) * ex + (y - ay) * ey) / ee, 0.0, 1.0)
            d2 = (x - (ax + tt * ex)) ** 2 + (y - (ay + tt * ey)) ** 2
            on_edge |= d2 <= BOUNDARY_EPS**2
        return inside | on_edge

    def line_intervals(self, xhat, s):
        xhat = _check_unit(xhat)
        v = self._v
        g = v @ xhat - s
        # nudge away from exact vertex hits to keep crossing pairing well defined
        if np.any(np.abs(g) < 1e-12):
            g = v @ xhat - (s + 3.7e-12)
        ta = v @ perp(xhat)
        taus = []
        n = len(v)
        for i in range(n):
            ga, gb = g[i], g[(i + 1) % n]
            if (ga > 0) != (gb > 0):
                t = ga / (ga - gb)
                taus.append(ta[i] + t * (ta[(i + 1) % n] - ta[i]))
        taus.sort()
        return [(taus[i], taus[i + 1]) for i in range(0, len(taus) - 1, 2)]


@dataclass(frozen=True)
class Annulus(Region):
    """Annular region r <= |y - center| <= R; r = 0 denotes a disk."""

    center: tuple[float, float]
    r: float
    R: float

    def __post_init__(self):
        if not (0.0 <= self.r < self.R):
            raise ValueError(f"annulus requires 0 <= r < R, got r={self.r}, R={self.R}")

    def bounding_box(self):
        cx, cy = self.center
        return (cx - self.R, cx + self.R, cy - self.R, cy + self.R)

    def mask(self, xs, ys):
        d2 = (np.asarray(xs) - self.center[0]) ** 2 + (np.asarray(ys) - self.center[1]) ** 2
        return (d2 <= self.R**2 + BOUNDARY_EPS) & (d2 >= self.r**2 - BOUNDARY_EPS)

    def line_intervals(self, xhat, s):
        xhat = _check_unit(xhat)
        c = np.asarray(self.center, dtype=float)
        d = s - float(xhat @ c)
        tc = float(perp(xhat) @ c)
        if abs(d) >= self.R:
            return []
        ho = np.sqrt(self.R**2 - d * d)
        if self.r > 0.0 and abs(d) < self.r:
            hi = np.sqrt(self.r**2 - d * d)
            return [(tc - ho, tc - hi), (tc + hi, tc + ho)]
        return [(tc - ho, tc + ho)]


@dataclass(frozen=True)
class Implicit(Region):
    """Region {g(y) <= 0} for a closed-form, numpy-vectorized inequality.

    The caller supplies the bounding box; the scan-line intersection is
    found by dense sampling plus bisection to BISECT_TOL in tau.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    box: tuple[float, float, float, float]
    samples: int = 4096

    def bounding_box(self):
        return self.box

    def mask(self, xs, ys):
        return np.asarray(self.fn(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float))) <= 0.0

    def _g_on_line(self, xhat, s, taus):
        p = perp(xhat)
        return np.asarray(self.fn(s * xhat[0] + taus * p[0], s * xhat[1] + taus * p[1]))

    def line_intervals(self, xhat, s):
        xhat = _check_unit(xhat)
        lo, hi = _tau_range(self.box, xhat, s)
        if lo >= hi:
            return []
        taus = np.linspace(lo, hi, self.samples)
        g = self._g_on_line(xhat, s, taus)
        inside = g <= 0.0
        edges = []
        for i in range(len(taus) - 1):
            if inside[i] != inside[i + 1]:
                a, b = taus[i], taus[i + 1]
                ga = g[i]
                while b - a > BISECT_TOL:
                    m = 0.5 * (a + b)
                    gm = float(self._g_on_line(xhat, s, np.array([m]))[0])
                    if (gm <= 0.0) == (ga <= 0.0):
                        a, ga = m, gm
                    else:
                        b = m
                edges.append(0.5 * (a + b))
        if inside[0]:
            edges.insert(0, lo)
        if inside[-1]:
            edges.append(hi)
        return [(edges[i], edges[i + 1]) for i in range(0, len(edges) - 1, 2)]


@dataclass(frozen=True)
class Union(Region):
    members: tuple[Region, ...]

    def bounding_box(self):
        boxes = [m.bounding_box() for m in self.members]
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def mask(self, xs, ys):
        out = np.zeros(np.asarray(xs).shape, dtype=bool)
        for m in self.members:
            out |= m.mask(xs, ys)
        return out

    def line_intervals(self, xhat, s):
        ivs = []
        for m in self.members:
            ivs = _interval_union(ivs, m.line_intervals(xhat, s))
        return ivs


@dataclass(frozen=True)
class Intersection(Region):
    members: tuple[Region, ...]

    def bounding_box(self):
        boxes = [m.bounding_box() for m in self.members if not isinstance(m, Complement)]
        if not boxes:
            raise ValueError("intersection of complements only is unbounded")
        return (
            max(b[0] for b in boxes),
            min(b[1] for b in boxes),
            max(b[2] for b in boxes),
            min(b[3] for b in boxes),
        )

    def mask(self, xs, ys):
        out = np.ones(np.asarray(xs).shape, dtype=bool)
        for m in self.members:
            out &= m.mask(xs, ys)
        return out

    def line_intervals(self, xhat, s):
        lo, hi = _tau_range(self.bounding_box(), xhat, s)
        if lo >= hi:
            return []
        ivs = [(lo, hi)]
        for m in self.members:
            if isinstance(m, Complement):
                ivs = _interval_subtract(ivs, m.member.line_intervals(xhat, s))
            else:
                ivs = _interval_intersect(ivs, m.line_intervals(xhat, s))
        return ivs


@dataclass(frozen=True)
class Complement(Region):
    """Set complement; only meaningful inside an Intersection (unbounded alone).

    Membership treats the shared boundary as inside, consistent with the
    boundary-inclusive convention of the member (the two overlap on a
    measure-zero set).
    """

    member: Region

    def bounding_box(self):
        return (-np.inf, np.inf, -np.inf, np.inf)

    def mask(self, xs, ys):
        return ~self.member.mask(xs, ys)

    def line_intervals(self, xhat, s):
        raise ValueError("complement is unbounded; wrap it in an Intersection")

    def validate(self):
        self.member.validate()


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(p3, p4, p1), orient(p3, p4, p2)
    d3, d4 = orient(p1, p2, p3), orient(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _self_intersects(v: np.ndarray) -> bool:
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            if j in (i, (i + 1) % n) or (j + 1) % n == i:
                continue
            if _segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]):
                return True
    return False


def _tau_range(box, xhat, s):
    # tau extent of the scan line clipped to the bounding box corners
    x_lo, x_hi, y_lo, y_hi = box
    p = perp(xhat)
    corners = np.array([[x_lo, y_lo], [x_lo, y_hi], [x_hi, y_lo], [x_hi, y_hi]])
    taus = corners @ p
    margin = 1e-9 + 1e-9 * (abs(taus.max()) + abs(taus.min()))
    return taus.min() - margin, taus.max() + margin


def _interval_union(a, b):
    ivs = sorted(a + b)
    out = []
    for lo, hi in ivs:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def _interval_intersect(a, b):
    out = []
    for alo, ahi in a:
        for blo, bhi in b:
            lo, hi = max(alo, blo), min(ahi, bhi)
            if lo < hi:
                out.append((lo, hi))
    return sorted(out)


def _interval_subtract(a, b):
    out = list(a)
    for blo, bhi in b:
        nxt = []
        for lo, hi in out:
            if bhi <= lo or blo >= hi:
                nxt.append((lo, hi))
                continue
            if lo < blo:
                nxt.append((lo, blo))
            if bhi < hi:
                nxt.append((bhi, hi))
        out = nxt
    return sorted(out)


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------
class Amplitude:
    """Pointwise complex amplitude law evaluated on component supports."""

    def eval(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(Amplitude):
    value: complex = 1.0 + 0.0j

    def eval(self, xs, ys):
        return np.full(np.asarray(xs).shape, complex(self.value))


@dataclass(frozen=True)
class RadialExponential(Amplitude):
    """exp(coef * |y|^2); coef = -0.05 and +/-0.25 are the stock choices."""

    coef: float

    def eval(self, xs, ys):
        return np.exp(self.coef * (np.asarray(xs) ** 2 + np.asarray(ys) ** 2)).astype(complex)


@dataclass(frozen=True)
class RadialAffine(Amplitude):
    """|y| + offset."""

    offset: float

    def eval(self, xs, ys):
        return (np.hypot(np.asarray(xs), np.asarray(ys)) + self.offset).astype(complex)


@dataclass(frozen=True)
class Expression(Amplitude):
    """Arbitrary vectorized closed-form amplitude."""

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def eval(self, xs, ys):
        return np.asarray(self.fn(np.asarray(xs), np.asarray(ys))).astype(complex)


# ---------------------------------------------------------------------------
# Scene
# ---------------------------------------------------------------------------
@dataclass
class SourceScene:
    """Compactly supported source: disjoint components with amplitude laws."""

    components: list[tuple[Region, Amplitude]]

    def __post_init__(self):
        for region, _ in self.components:
            region.validate()
        if len(self.components) > 1:
            self._check_disjoint()
        self._check_boundary_amplitude()

    def bounding_box(self):
        if not self.components:
            return (0.0, 0.0, 0.0, 0.0)
        boxes = [r.bounding_box() for r, _ in self.components]
        return (
            min(b[0] for b in boxes),
            max(b[1] for b in boxes),
            min(b[2] for b in boxes),
            max(b[3] for b in boxes),
        )

    def _check_disjoint(self):
        # rejection sampling on the joint bounding box; warning only, so users
        # may deliberately compose overlapping pieces via set expressions
        x_lo, x_hi, y_lo, y_hi = self.bounding_box()
        rng = np.random.default_rng(0x5EED)
        xs = rng.uniform(x_lo, x_hi, DISJOINT_SAMPLES)
        ys = rng.uniform(y_lo, y_hi, DISJOINT_SAMPLES)
        counts = np.zeros(DISJOINT_SAMPLES, dtype=int)
        for region, _ in self.components:
            counts += region.mask(xs, ys)
        n_overlap = int(np.sum(counts > 1))
        if n_overlap:
            logger.warning(
                "scene components overlap on ~%.2f%% of sampled points",
                100.0 * n_overlap / DISJOINT_SAMPLES,
            )

    def _check_boundary_amplitude(self):
        # amplitude must not vanish on component boundaries (sampled check)
        for region, amp in self.components:
            pts = _boundary_samples(region, 128)
            if pts is None or len(pts) == 0:
                continue
            vals = amp.eval(pts[:, 0], pts[:, 1])
            if np.any(np.abs(vals) < 1e-12):
                raise ValueError("amplitude vanishes on a component boundary")

    def evaluate(self, point) -> complex:
        """Pointwise source value: sum of component amplitudes on their supports."""
        x, y = float(point[0]), float(point[1])
        return complex(self.evaluate_many(np.array([x]), np.array([y]))[0])

    def evaluate_many(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        out = np.zeros(xs.shape, dtype=complex)
        for region, amp in self.components:
            m = region.mask(xs, ys)
            if np.any(m):
                out[m] += amp.eval(xs[m], ys[m])
        return out


def _boundary_samples(region: Region, n: int):
    if isinstance(region, Polygon):
        v = region.vertex_array
        pts = []
        per_edge = max(2, n // len(v))
        for i in range(len(v)):
            a, b = v[i], v[(i + 1) % len(v)]
            for t in np.linspace(0.0, 1.0, per_edge, endpoint=False):
                pts.append(a + t * (b - a))
        return np.array(pts)
    if isinstance(region, Annulus):
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        c = np.asarray(region.center)
        pts = [c + region.R * np.column_stack([np.cos(th), np.sin(th)])]
        if region.r > 0:
            pts.append(c + region.r * np.column_stack([np.cos(th), np.sin(th)]))
        return np.vstack(pts)
    return None  # implicit/boolean regions: no cheap exact boundary


def contains(region: Region, point) -> bool:
    """Boundary-inclusive membership; module-level convenience form."""
    return region.contains(point)


def evaluate_source(scene: SourceScene, point) -> complex:
    """Source value f(point); zero outside all components."""
    return scene.evaluate(point)


def line_support_intersections(scene: SourceScene, xhat, s: float) -> list[tuple[float, float]]:
    """Ordered tau-intervals where the scan line meets the scene support."""
    xhat = _check_unit(xhat)
    ivs: list[tuple[float, float]] = []
    for region, _ in scene.components:
        ivs = _interval_union(ivs, region.line_intervals(xhat, float(s)))
    return ivs


def tangent_offsets(circle: tuple[tuple[float, float], float], xhat) -> tuple[float, float]:
    """Offsets of the two scan lines tangent to a circle, (s1, s2) with s1 < s2."""
    (cx, cy), radius = circle
    if radius <= 0:
        raise ValueError("tangent_offsets requires radius > 0")
    xhat = _check_unit(xhat)
    m = xhat[0] * cx + xhat[1] * cy
    return (m - radius, m + radius)


# ---------------------------------------------------------------------------
# Ground truth
# ---------------------------------------------------------------------------
@dataclass
class CornerInfo:
    """A polygon corner with its two incident edges.

    ``edge_dirs`` are unit vectors pointing away from the corner along each
    incident edge; ``inward_normals`` point into the polygon interior from
    the corresponding edge.
    """

    point: np.ndarray
    edge_dirs: tuple[np.ndarray, np.ndarray]
    inward_normals: tuple[np.ndarray, np.ndarray]


@dataclass
class GroundTruth:
    corners: list[CornerInfo] = field(default_factory=list)
    edges: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    circles: list[tuple[tuple[float, float], float]] = field(default_factory=list)

    @property
    def corner_points(self) -> np.ndarray:
        return np.array([c.point for c in self.corners]).reshape(-1, 2)


def ground_truth(scene: SourceScene) -> GroundTruth:
    """Exact corners, edges, and circles of a scene built from polygons/annuli."""
    gt = GroundTruth()
    for region, _ in scene.components:
        _collect_truth(region, gt)
    return gt


def _collect_truth(region: Region, gt: GroundTruth):
    if isinstance(region, Polygon):
        v = region.vertex_array
        n = len(v)
        for i in range(n):
            p = v[i]
            nxt = v[(i + 1) % n]
            prv = v[(i - 1) % n]
            e1 = (nxt - p) / np.linalg.norm(nxt - p)
            e2 = (prv - p) / np.linalg.norm(prv - p)
            # CCW orientation: interior lies left of each directed edge
            n1 = perp(e1)
            n2 = -perp(e2)
            gt.corners.append(CornerInfo(p.copy(), (e1, e2), (n1, n2)))
            gt.edges.append((p.copy(), nxt.copy()))
    elif isinstance(region, Annulus):
        gt.circles.append((tuple(region.center), region.R))
        if region.r > 0:
            gt.circles.append((tuple(region.center), region.r))
    elif isinstance(region, (Union, Intersection)):
        for m in region.members:
            _collect_truth(m, gt)
    elif isinstance(region, Complement):
        _collect_truth(region.member, gt)


def corner_slope_jump(corner: CornerInfo, xhat) -> float:
    """Jump of the chord-length derivative contributed by a polygon corner.

    For each incident edge with direction e and inward normal n, the moving
    interval endpoint has slope u/c in tau per unit s (c = e.xhat, u =
    e.perp(xhat)) and exists on the side sign(c) of the corner offset; the
    endpoint is an upper end when the interior lies below it.  Summing the
    signed one-sided slopes gives the derivative jump that multiplies f at
    the corner.  Equivalent to the tangent-of-normal-angle form.
    """
    xhat = _check_unit(xhat)
    p = perp(xhat)
    total = 0.0
    for e, n in zip(corner.edge_dirs, corner.inward_normals):
        c = float(e @ xhat)
        u = float(e @ p)
        if abs(c) < 1e-9:
            raise ValueError("edge parallel to scan line: slope jump unbounded")
        g = 1.0 if float(n @ p) < 0 else -1.0
        total += g * u / abs(c)
    return total
