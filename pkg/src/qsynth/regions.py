"""Planar regions and magnitude intervals that encode each approximation condition.

A :class:`Region` is stored in a canonical frame: a query point ``u`` is
first rotated by ``-theta`` (and optionally reflected in the real axis),
then tested against half-plane, disc and hyperbola constraints.  Every
constructor also records a bounding rectangle of the canonical region,
which the enumerator uses to build its search ellipse.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any

import mpmath
from scipy import integrate

__all__ = [
    "Disc",
    "HalfPlane",
    "Hyperbola",
    "Interval",
    "Region",
    "RegionParameterError",
    "diagonal_region",
    "fixed_under_rotation_region",
    "magnitude_interval",
    "mixed_diagonal_regions",
    "mixed_magnitude_intervals",
    "mixed_projective_regions",
    "precision_bits",
    "projective_region",
    "region_area",
]

DEFAULT_PRECISION_BITS = 256


class RegionParameterError(ValueError):
    """Invalid accuracy, probability or angle passed to a region constructor."""


def precision_bits() -> int:
    """Working precision floor for membership tests (``QSYNTH_PRECISION_BITS``)."""
    raw = os.environ.get("QSYNTH_PRECISION_BITS")
    if raw:
        try:
            return max(64, int(raw))
        except ValueError:
            pass
    return DEFAULT_PRECISION_BITS


@dataclass(frozen=True)
class HalfPlane:
    """``nx x + ny y <= offset + shift`` (``<`` when ``strict``).

    ``shift`` carries a small correction that would be lost if added to
    ``offset`` in double precision.
    """

    nx: float
    ny: float
    offset: float
    strict: bool = False
    shift: float = 0.0


@dataclass(frozen=True)
class Disc:
    """``|p - c| <= radius`` when ``inside``, else ``|p - c| >= radius``."""

    cx: float
    cy: float
    radius: float
    inside: bool = True


@dataclass(frozen=True)
class Hyperbola:
    """Constraint bounding the over-rotation once an under-rotation is fixed.

    ``kind="unitary"``: ``y A <= x B + C / x`` with ``A = 1 - eps/2 - x1^2``,
    ``B = x1 y1`` and ``C = x1 y1 (eps/2 - 1)``.

    ``kind="fallback"``: ``x A <= -y B + C / y`` with ``A = y1^2 - eps/2``,
    ``B = x1 y1`` and ``C = eps x1 y1 / 2``.

    Membership multiplies through by the positive coordinate, giving a
    polynomial inequality.
    """

    kind: str
    A: float
    B: float
    C: float

    def margin(self, x: Any, y: Any) -> Any:
        """Nonnegative iff the point satisfies the constraint."""
        if self.kind == "unitary":
            return self.B * x * x + self.C - self.A * x * y
        return -self.B * y * y + self.C - self.A * x * y


@dataclass(frozen=True)
class Region:
    """Conjunction of constraints in a rotated (and possibly reflected) frame."""

    halfplanes: tuple[HalfPlane, ...]
    discs: tuple[Disc, ...]
    hyperbola: Hyperbola | None
    theta: float
    reflect: bool = False
    bounds: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    label: str = ""
    x_depth: float | None = None  # exact bounds[1] - bounds[0] when the difference underflows
    params: dict = field(default_factory=dict, compare=False)

    # -- frames -------------------------------------------------------------
    def to_canonical(self, u: Any) -> tuple[Any, Any]:
        """Rotate ``u`` by ``-theta`` (and reflect) using mpmath at the current precision."""
        u = mpmath.mpc(u)
        w = u * mpmath.expj(-mpmath.mpf(self.theta))
        y = -w.imag if self.reflect else w.imag
        return w.real, y

    def from_canonical(self, x: float, y: float) -> complex:
        if self.reflect:
            y = -y
        return complex(x, y) * complex(math.cos(self.theta), math.sin(self.theta))

    # -- membership ---------------------------------------------------------
    def _margins(self, x: Any, y: Any) -> list[tuple[Any, bool]]:
        out = []
        for h in self.halfplanes:
            out.append((h.offset - (h.nx * x + h.ny * y) + h.shift, h.strict))
        for d in self.discs:
            dist2 = (x - d.cx) ** 2 + (y - d.cy) ** 2
            r2 = mpmath.mpf(d.radius) ** 2 if isinstance(x, mpmath.mpf) else d.radius**2
            out.append((r2 - dist2 if d.inside else dist2 - r2, False))
        if self.hyperbola is not None:
            out.append((self.hyperbola.margin(x, y), False))
        return out

    def contains(self, u: Any, prec: int | None = None) -> bool:
        """Decide membership of the complex point ``u``.

        Evaluated in mpmath; when a margin is within rounding noise of zero
        the test is repeated at doubled precision before treating the point
        as lying on the boundary.
        """
        bits = prec or precision_bits()
        for _ in range(4):
            with mpmath.workprec(bits):
                x, y = self.to_canonical(u)
                tiny = mpmath.ldexp(1, -bits + 24)
                undecided = False
                for margin, strict in self._margins(x, y):
                    if abs(margin) <= tiny:
                        undecided = True
                        continue
                    if margin < 0:
                        return False
                if not undecided:
                    return True
            bits *= 2
        with mpmath.workprec(bits):
            x, y = self.to_canonical(u)
            tiny = mpmath.ldexp(1, -bits + 24)
            for margin, strict in self._margins(x, y):
                if margin < -tiny or (strict and abs(margin) <= tiny):
                    return False
        return True

    __contains__ = contains

    def contains_float(self, u: complex) -> bool:
        """Double-precision membership (for statistics and plots only)."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        x = u.real * c + u.imag * s
        y = -u.real * s + u.imag * c
        if self.reflect:
            y = -y
        for margin, strict in self._margins_float(x, y):
            if margin < 0 or (strict and margin == 0):
                return False
        return True

    def _margins_float(self, x: float, y: float) -> list[tuple[float, bool]]:
        out = []
        for h in self.halfplanes:
            out.append((h.offset - (h.nx * x + h.ny * y) + h.shift, h.strict))
        for d in self.discs:
            dist2 = (x - d.cx) ** 2 + (y - d.cy) ** 2
            out.append((d.radius**2 - dist2 if d.inside else dist2 - d.radius**2, False))
        if self.hyperbola is not None:
            out.append((self.hyperbola.margin(x, y), False))
        return out

    # -- geometry -----------------------------------------------------------
    def y_section(self, x: float) -> list[tuple[float, float]]:
        """Canonical-frame set ``{y : (x, y) in region}`` as disjoint intervals."""
        x0, x1, y0, y1 = self.bounds
        cur = [(y0, y1)] if x0 <= x <= x1 else []
        for h in self.halfplanes:
            if h.ny > 0:
                cur = _intersect(cur, [(-math.inf, (h.offset - h.nx * x + h.shift) / h.ny)])
            elif h.ny < 0:
                cur = _intersect(cur, [((h.offset - h.nx * x + h.shift) / h.ny, math.inf)])
            elif h.nx * x - h.offset > h.shift:
                cur = []
        for d in self.discs:
            t = d.radius**2 - (x - d.cx) ** 2
            if d.inside:
                cur = _intersect(cur, [(d.cy - math.sqrt(t), d.cy + math.sqrt(t))] if t >= 0 else [])
            elif t > 0:
                s = math.sqrt(t)
                cur = _intersect(cur, [(-math.inf, d.cy - s), (d.cy + s, math.inf)])
        hyp = self.hyperbola
        if hyp is not None:
            cur = _intersect(cur, _hyperbola_section(hyp, x))
        return cur

    def area(self) -> float:
        return region_area(self)

    def mirror(self) -> "Region":
        """The same region rotated by ``pi``."""
        return Region(
            self.halfplanes,
            self.discs,
            self.hyperbola,
            self.theta + math.pi,
            self.reflect,
            self.bounds,
            self.label + "-mirror",
            dict(self.params),
            self.x_depth,
        )

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "theta": float(self.theta),
            "reflect": self.reflect,
            "bounds": list(self.bounds),
            "x_depth": self.x_depth,
            "halfplanes": [asdict(h) for h in self.halfplanes],
            "discs": [asdict(d) for d in self.discs],
            "hyperbola": asdict(self.hyperbola) if self.hyperbola is not None else None,
            "params": {k: float(v) if isinstance(v, (int, float)) else v for k, v in self.params.items()},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _intersect(a: list[tuple[float, float]], b: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo < hi:
                out.append((lo, hi))
    return out


def _hyperbola_section(h: Hyperbola, x: float) -> list[tuple[float, float]]:
    if h.kind == "unitary":
        # A x y <= B x^2 + C (x > 0)
        rhs = h.B * x * x + h.C
        coef = h.A * x
        if coef > 0:
            return [(-math.inf, rhs / coef)]
        if coef < 0:
            return [(rhs / coef, math.inf)]
        return [(-math.inf, math.inf)] if rhs >= 0 else []
    # B y^2 + A x y - C <= 0
    a, b, c = h.B, h.A * x, -h.C
    if a == 0:
        if b > 0:
            return [(-math.inf, -c / b)]
        if b < 0:
            return [(-c / b, math.inf)]
        return [(-math.inf, math.inf)] if c <= 0 else []
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return [((-b - s) / (2 * a), (-b + s) / (2 * a))]


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def _check_eps(eps: float, upper: float | None = 2.0) -> None:
    if not eps > 0:
        raise RegionParameterError("eps must be positive")
    if upper is not None and eps > upper:
        raise RegionParameterError(f"eps must not exceed {upper}")


def _check_q(q: float) -> None:
    if not 0 < q < 1:
        raise RegionParameterError("q must lie strictly between 0 and 1")


UNIT_DISC = Disc(0.0, 0.0, 1.0, True)


def _one_minus_sqrt(t: float) -> float:
    """``1 - sqrt(1 - t)`` without cancellation."""
    return t / (1 + math.sqrt(max(0.0, 1 - t)))


def _wedge(delta: float, lower: bool = True, upper: bool = True) -> list[HalfPlane]:
    """Half-planes bounding ``-delta <= arg <= delta`` around the positive real axis."""
    s, c = math.sin(delta), math.cos(delta)
    out = []
    if upper:
        out.append(HalfPlane(-s, c, 0.0))  # y cos - x sin <= 0
    if lower:
        out.append(HalfPlane(-s, -c, 0.0))  # -y cos - x sin <= 0
    return out


def diagonal_region(theta: float, eps: float) -> Region:
    """Top-left entries ``u`` with ``|Re(u e^{-i theta})| >= sqrt(1 - eps^2/4)`` and ``|u| <= 1``.

    The region around ``e^{i theta}`` is returned; its mirror around
    ``-e^{i theta}`` is ``region.mirror()``.
    """
    _check_eps(eps)
    delta = math.asin(eps / 2)
    depth = _one_minus_sqrt(eps * eps / 4)
    xmin = 1 - depth
    return Region(
        (HalfPlane(-1.0, 0.0, -1.0, shift=depth),),
        (UNIT_DISC,),
        None,
        theta,
        bounds=(xmin, 1.0, -math.sin(delta), math.sin(delta)),
        label="diagonal",
        params={"eps": eps, "delta": delta},
        x_depth=depth,
    )


def projective_region(theta: float, eps: float, q: float) -> Region:
    """Top-left entries with ``|u| >= sqrt(q)`` and ``sin|Arg u - theta| <= eps/2``."""
    _check_eps(eps, None)
    _check_q(q)
    delta = math.asin(min(1.0, eps / 2))
    rq = math.sqrt(q)
    return Region(
        tuple(_wedge(delta)) + (HalfPlane(-1.0, 0.0, 0.0),),
        (UNIT_DISC, Disc(0.0, 0.0, rq, False)),
        None,
        theta,
        bounds=(rq * math.cos(delta), 1.0, -math.sin(delta), math.sin(delta)),
        label="projective",
        params={"eps": eps, "q": q, "delta": delta},
    )


def mixed_diagonal_regions(theta: float, eps: float) -> tuple[Region, Region]:
    """Under- and over-rotation regions for unitary mixing.

    Points with ``Im(u e^{-i theta}) = 0`` belong to the under region.
    """
    _check_eps(eps)
    depth = _one_minus_sqrt(eps / 2)
    xmin = 1 - depth
    ymax = math.sqrt(eps / 2)
    params = {"eps": eps, "delta_mix": math.asin(min(1.0, ymax))}
    under = Region(
        (HalfPlane(-1.0, 0.0, -1.0, shift=depth), HalfPlane(0.0, 1.0, 0.0)),
        (UNIT_DISC,),
        None,
        theta,
        bounds=(xmin, 1.0, -ymax, 0.0),
        label="mixed-diagonal-under",
        params=params,
        x_depth=depth,
    )
    over = Region(
        (HalfPlane(-1.0, 0.0, -1.0, shift=depth), HalfPlane(0.0, -1.0, 0.0, strict=True)),
        (UNIT_DISC,),
        None,
        theta,
        bounds=(xmin, 1.0, 0.0, ymax),
        label="mixed-diagonal-over",
        params=params,
        x_depth=depth,
    )
    return under, over


def mixed_projective_regions(theta: float, eps: float, q: float) -> tuple[Region, Region]:
    """Under/over regions with ``|u| >= sqrt(q)`` and ``sin(Arg u - theta)`` in ``[-sqrt(eps/2), 0]`` resp. ``(0, sqrt(eps/2)]``."""
    _check_eps(eps)
    _check_q(q)
    dmix = math.asin(min(1.0, math.sqrt(eps / 2)))
    rq = math.sqrt(q)
    s = math.sin(dmix)
    discs = (UNIT_DISC, Disc(0.0, 0.0, rq, False))
    params = {"eps": eps, "q": q, "delta_mix": dmix}
    right = HalfPlane(-1.0, 0.0, 0.0)
    under = Region(
        (_wedge(dmix, lower=True, upper=False)[0], HalfPlane(0.0, 1.0, 0.0), right),
        discs,
        None,
        theta,
        bounds=(rq * math.cos(dmix), 1.0, -s, 0.0),
        label="mixed-projective-under",
        params=params,
    )
    over = Region(
        (_wedge(dmix, lower=False, upper=True)[0], HalfPlane(0.0, -1.0, 0.0, strict=True), right),
        discs,
        None,
        theta,
        bounds=(rq * math.cos(dmix), 1.0, 0.0, s),
        label="mixed-projective-over",
        params=params,
    )
    return under, over


def fixed_under_rotation_region(
    theta: float,
    eps: float,
    x1: float,
    y1: float,
    kind: str = "unitary",
    q: float | None = None,
    reflect: bool = False,
) -> Region:
    """Over-rotation region once an under-rotation ``r1 e^{i(theta + delta1)}`` is fixed.

    ``x1 = r1 cos(delta1)`` and ``y1 = -r1 sin(delta1) >= 0``.  With
    ``reflect=True`` the roles are swapped: the fixed entry is the
    over-rotation and the returned region holds admissible
    under-rotations.  ``q`` adds the success-probability disc for the
    fallback kind.
    """
    _check_eps(eps)
    if x1 <= 0 or y1 < 0:
        raise RegionParameterError("need x1 > 0 and y1 >= 0")
    halfplanes = [HalfPlane(0.0, -1.0, 0.0, strict=True), HalfPlane(-1.0, 0.0, 0.0)]
    discs = [UNIT_DISC]
    if kind == "unitary":
        c = 1 - eps / 2
        a = c - x1 * x1
        hyp = Hyperbola("unitary", a, x1 * y1, x1 * y1 * (eps / 2 - 1))
        if x1 * y1 == 0:
            bounds = (0.0, 1.0, 0.0, 0.0 if a > 0 else 1.0)
        elif a >= 0:
            bounds = (math.sqrt(c), 1.0, 0.0, math.sqrt(max(0.0, 1 - c)))
        else:
            xlo = _unitary_xlo(hyp, c)
            bounds = (xlo, 1.0, 0.0, math.sqrt(max(0.0, 1 - xlo * xlo)))
    elif kind == "fallback":
        b = y1 * y1 - eps / 2
        hyp = Hyperbola("fallback", b, x1 * y1, eps * x1 * y1 / 2)
        if x1 * y1 == 0:
            ymax = 1.0 if b <= 0 else 0.0
        elif b >= 0:
            ymax = math.sqrt(eps / 2)
        else:
            g = -b
            ymax = (g + math.sqrt(g * g + 2 * eps * x1 * x1 * y1 * y1)) / (2 * x1 * y1)
        ymax = min(ymax, 1.0)
        xlo = 0.0
        if q is not None:
            _check_q(q)
            discs.append(Disc(0.0, 0.0, math.sqrt(q), False))
            xlo = math.sqrt(max(q - ymax * ymax, 0.0))
        bounds = (xlo, 1.0, 0.0, ymax)
    else:
        raise RegionParameterError(f"unknown kind {kind!r}")
    return Region(
        tuple(halfplanes),
        tuple(discs),
        hyp,
        theta,
        reflect=reflect,
        bounds=bounds,
        label=f"fixed-under-{kind}",
        params={"eps": eps, "x1": x1, "y1": y1, **({"q": q} if q is not None else {})},
    )


def _unitary_xlo(hyp: Hyperbola, c: float) -> float:
    """Smallest ``x`` where the unitary-kind region meets the unit circle."""

    def g(x: float) -> float:
        return hyp.margin(x, math.sqrt(max(0.0, 1 - x * x)))

    grid = [i / 2000 for i in range(1, 2001)]
    xs = next((x for x in grid if g(x) >= 0), math.sqrt(c))
    lo = max(xs - 1 / 2000, 1e-12)
    hi = xs
    if g(lo) >= 0:
        return max(0.0, lo - 1e-9)
    for _ in range(80):
        mid = (lo + hi) / 2
        if g(mid) >= 0:
            hi = mid
        else:
            lo = mid
    return max(0.0, lo - 1e-12)


# ---------------------------------------------------------------------------
# magnitude intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Closed interval of admissible values of ``|u|``."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower > self.upper + 1e-15:
            raise RegionParameterError("interval lower bound exceeds upper bound")

    def contains(self, v: Any) -> bool:
        return self.lower <= v <= self.upper

    __contains__ = contains

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def squared(self) -> "Interval":
        return Interval(self.lower**2, self.upper**2)

    def to_json(self) -> dict:
        return {"lower": float(self.lower), "upper": float(self.upper)}


def _check_theta(theta: float) -> None:
    if not -1e-15 <= theta <= math.pi / 2 + 1e-15:
        raise RegionParameterError("theta must lie in [0, pi/2]")


def magnitude_interval(theta: float, eps: float) -> Interval:
    """``{cos t : t in [0, pi/2], |t - theta| <= arcsin(eps/2)}``."""
    _check_eps(eps)
    _check_theta(theta)
    delta = math.asin(eps / 2)
    hi_angle = min(theta + delta, math.pi / 2)
    lo_angle = max(theta - delta, 0.0)
    return Interval(max(0.0, math.cos(hi_angle)), math.cos(lo_angle))


def mixed_magnitude_intervals(theta: float, eps: float) -> tuple[Interval, Interval]:
    """Under-rotation (``t <= theta``) and over-rotation (``t >= theta``) magnitude intervals."""
    _check_eps(eps)
    _check_theta(theta)
    dmix = math.asin(min(1.0, math.sqrt(eps / 2)))
    c = math.cos(theta)
    under = Interval(c, math.cos(max(theta - dmix, 0.0)))
    over = Interval(max(0.0, math.cos(min(theta + dmix, math.pi / 2))), c)
    return under, over


# ---------------------------------------------------------------------------
# area
# ---------------------------------------------------------------------------


def region_area(r: Region | Interval) -> float:
    """Area of a region (length for an interval) by adaptive quadrature over x."""
    if isinstance(r, Interval):
        return r.length
    x0, x1, y0, y1 = r.bounds
    if not all(math.isfinite(v) for v in r.bounds):
        raise RegionParameterError("region is unbounded")
    if x1 <= x0 or y1 <= y0:
        return 0.0

    def section(x: float) -> float:
        return sum(hi - lo for lo, hi in r.y_section(x))

    pts = sorted({x0 + (x1 - x0) * t for t in (0.25, 0.5, 0.75)})
    val, _ = integrate.quad(section, x0, x1, points=pts, epsabs=0.0, epsrel=1e-10, limit=2000)
    return float(val)
