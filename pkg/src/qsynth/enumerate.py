"""Integer point enumeration in convex bodies and boxes.

Two engines are provided:

* :func:`enumerate_convex` slices a general convex body (linear and
  ellipsoidal constraints, moderate coordinates) along the
  Gram-Schmidt directions of an LLL-reduced lattice after a rounding
  transform, computing the slice bounds by exact optimisation over each
  affine section.
* :class:`LatticeBallSearch` does the same for a ball in a transformed
  space where the lattice is given in fixed point with arbitrary
  precision, so that candidates with hundreds of bits are handled
  exactly.  It powers :func:`candidates_2d`, :func:`candidates_1d` and
  :func:`enumerate_box`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import mpmath
import numpy as np

from .regions import Interval, Region, precision_bits
from .rings import (
    Coords,
    GateSetDescriptor,
    RingElement,
    get_gate_set,
    pconj,
    pdivexact,
    pembed_fixed,
    pembed_mp,
    pis_zero,
    pmul,
    pone,
    ppow,
    psign_embeddings,
    psub,
    pscale,
)

__all__ = [
    "BoxSpec",
    "ConvexBody",
    "LatticeBallSearch",
    "UnboundedBodyError",
    "box_point_by_rounding",
    "box_volume_thresholds",
    "candidates_1d",
    "candidates_2d",
    "enumerate_box",
    "enumerate_convex",
    "lll_reduce",
]

LLL_DELTA = Fraction(99, 100)


class UnboundedBodyError(ValueError):
    """The convex body is unbounded or has empty interior."""


# ---------------------------------------------------------------------------
# LLL
# ---------------------------------------------------------------------------


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = LLL_DELTA) -> tuple[list[list[int]], list[list[int]]]:
    """Integral LLL reduction of the rows of ``basis``.

    Returns ``(reduced, transform)`` with ``reduced = transform * basis``
    and ``transform`` unimodular.  All arithmetic is exact.
    """
    b = [list(map(int, v)) for v in basis]
    n = len(b)
    h = [[int(i == j) for j in range(n)] for i in range(n)]
    if n <= 1:
        return b, h
    p, q = delta.numerator, delta.denominator

    def dot(x: list[int], y: list[int]) -> int:
        return sum(a * c for a, c in zip(x, y))

    # 1-indexed bookkeeping as in the integral algorithm
    d = [0] * (n + 1)
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    d[0] = 1
    d[1] = dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("basis vectors are linearly dependent")
    k = 2
    kmax = 1

    def redi(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l]:
            r = (2 * lam[k][l] + d[l]) // (2 * d[l])
            bk, bl = b[k - 1], b[l - 1]
            for i in range(len(bk)):
                bk[i] -= r * bl[i]
            hk, hl = h[k - 1], h[l - 1]
            for i in range(n):
                hk[i] -= r * hl[i]
            lam[k][l] -= r * d[l]
            for i in range(1, l):
                lam[k][i] -= r * lam[l][i]

    def swapi(k: int) -> None:
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        h[k - 1], h[k - 2] = h[k - 2], h[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        bb = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (bb * t + lm * lam[i][k]) // d[k]
        d[k - 1] = bb

    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(b[k - 1], b[j - 1])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k] = u
                    if u == 0:
                        raise ValueError("basis vectors are linearly dependent")
        while True:
            redi(k, k - 1)
            if q * d[k] * d[k - 2] < p * d[k - 1] * d[k - 1] - q * lam[k][k - 1] ** 2:
                swapi(k)
                k = max(2, k - 1)
            else:
                for l in range(k - 2, 0, -1):
                    redi(k, l)
                k += 1
                break
    return b, h


# ---------------------------------------------------------------------------
# fixed-point ball search
# ---------------------------------------------------------------------------


def _to_float(x: int, scale_bits: int) -> float:
    """``x / 2^scale_bits`` as a float without overflow."""
    s = max(0, abs(x).bit_length() - 62)
    return math.ldexp(float(x >> s) if s else float(x), s - scale_bits)


class LatticeBallSearch:
    """Points ``z`` of ``Z^n`` with ``|L z - c| <= radius``.

    ``L`` and ``c`` are supplied in fixed point: ``cols[i]`` is
    ``round(2^P L e_i)`` and ``center`` is ``round(2^P c)``.  The search
    LLL-reduces the columns (optionally warm-started from a previous
    transform), recovers an exact integer offset near ``L^{-1} c`` by
    iterative refinement, and enumerates the Fincke-Pohst tree of the
    reduced basis.
    """

    def __init__(self) -> None:
        self.transform: list[list[int]] | None = None
        self.last_count = 0
        self.truncated = False

    def search(
        self,
        cols: Sequence[Sequence[int]],
        center: Sequence[int],
        scale_bits: int,
        radius: float,
        limit: int | None = None,
    ) -> list[tuple[int, ...]]:
        n = len(cols)
        cols = [list(c) for c in cols]
        start = cols
        warm = self.transform
        if warm is not None and len(warm) == n:
            start = [[sum(w * c[r] for w, c in zip(row, cols) if w) for r in range(n)] for row in warm]
        reduced, h = lll_reduce(start)
        if warm is not None and len(warm) == n:
            total = [[sum(h[i][k] * warm[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        else:
            total = h
        self.transform = total
        mat = np.array([[_to_float(reduced[i][r], scale_bits) for i in range(n)] for r in range(n)])
        inv = np.linalg.inv(mat)
        # exact offset w0 with reduced * w0 ~ center
        w0 = [0] * n
        res = list(center)
        for _ in range(64):
            rf = np.array([_to_float(x, scale_bits) for x in res])
            dw = [int(round(v)) for v in inv @ rf]
            if not any(dw):
                break
            for i, di in enumerate(dw):
                if di:
                    w0[i] += di
                    vec = reduced[i]
                    for r in range(n):
                        res[r] -= di * vec[r]
        r0 = -np.array([_to_float(x, scale_bits) for x in res])
        qm, rm = np.linalg.qr(mat)
        cvec = qm.T @ r0
        rad = radius * (1 + 1e-9) + 1e-12
        found: list[tuple[int, ...]] = []
        self.truncated = False
        t = [0] * n

        def rec(i: int, acc: float) -> bool:
            rem = rad * rad - acc
            if rem < 0:
                return True
            partial = cvec[i] + sum(rm[i, j] * t[j] for j in range(i + 1, n))
            rii = rm[i, i]
            mid = -partial / rii
            half = math.sqrt(rem) / abs(rii)
            lo = math.ceil(mid - half)
            hi = math.floor(mid + half)
            for ti in range(lo, hi + 1):
                t[i] = ti
                v = partial + rii * ti
                if i == 0:
                    if acc + v * v <= rad * rad:
                        found.append(tuple(t))
                        if limit is not None and len(found) >= limit:
                            self.truncated = True
                            return False
                elif not rec(i - 1, acc + v * v):
                    return False
            t[i] = 0
            return True

        rec(n - 1, 0.0)
        out = []
        for tv in found:
            coeff = [w + ti for w, ti in zip(w0, tv)]
            z = [0] * n
            for ci, row in zip(coeff, total):
                if ci:
                    for j in range(n):
                        z[j] += ci * row[j]
            out.append(tuple(z))
        self.last_count = len(out)
        return out


# ---------------------------------------------------------------------------
# general convex bodies
# ---------------------------------------------------------------------------


@dataclass
class ConvexBody:
    """``{x : A x <= b}`` intersected with ellipsoids ``(x - p)^T Q (x - p) <= 1``."""

    dim: int
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    quadratics: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    tol: float = 1e-9

    def __post_init__(self) -> None:
        if self.A is not None:
            self.A = np.asarray(self.A, dtype=float).reshape(-1, self.dim)
            self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.quadratics = [(np.asarray(q, dtype=float), np.asarray(p, dtype=float)) for q, p in self.quadratics]
        for q, _ in self.quadratics:
            if np.any(np.linalg.eigvalsh(q) <= 0):
                raise UnboundedBodyError("quadratic constraint is not positive definite")
        lo, hi = self.bounding_box()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise UnboundedBodyError("convex body is unbounded")
        self._box = (lo, hi)

    def contains(self, x: Sequence[float]) -> bool:
        x = np.asarray(x, dtype=float)
        if self.A is not None and np.any(self.A @ x > self.b + self.tol):
            return False
        for q, p in self.quadratics:
            v = x - p
            if v @ q @ v > 1 + self.tol:
                return False
        return True

    def vertices(self) -> np.ndarray:
        """Vertices of the polyhedral part (all ``dim``-subsets of constraints)."""
        if self.A is None:
            return np.zeros((0, self.dim))
        return _polytope_vertices(self.A, self.b, self.tol)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        if self.A is not None:
            vs = self.vertices()
            if len(vs) and _polytope_bounded(self.A):
                lo = np.maximum(lo, vs.min(axis=0))
                hi = np.minimum(hi, vs.max(axis=0))
            elif len(vs) == 0 and _polytope_bounded(self.A):
                return np.zeros(self.dim), -np.ones(self.dim)
        for q, p in self.quadratics:
            qi = np.linalg.inv(q)
            ext = np.sqrt(np.diag(qi))
            lo = np.maximum(lo, p - ext)
            hi = np.minimum(hi, p + ext)
        return lo, hi

    def is_empty(self) -> bool:
        lo, hi = self._box
        return bool(np.any(hi < lo))


def _polytope_bounded(a: np.ndarray) -> bool:
    """A polyhedron ``Ax <= b`` is bounded iff no nonzero ``y`` has ``A y <= 0``."""
    from scipy.optimize import linprog

    dim = a.shape[1]
    for i in range(dim):
        for s in (1.0, -1.0):
            c = np.zeros(dim)
            c[i] = -s
            res = linprog(c, A_ub=a, b_ub=np.zeros(len(a)), bounds=[(-1, 1)] * dim, method="highs")
            if res.status == 0 and -res.fun > 1e-9:
                return False
    return True


def _polytope_vertices(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    m, dim = a.shape
    if dim == 0:
        return np.zeros((1, 0)) if np.all(b >= -tol) else np.zeros((0, 0))
    combos = list(itertools.combinations(range(m), dim))
    if not combos:
        return np.zeros((0, dim))
    idx = np.array(combos)
    mats = a[idx]
    rhs = b[idx]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 1e-12
    if not np.any(ok):
        return np.zeros((0, dim))
    sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(sols @ a.T <= b + 1e-9 * (1 + np.abs(b)), axis=1)
    return sols[feas]


def _rounding_transform(body: ConvexBody) -> np.ndarray:
    """Linear map making the body roughly round (Lenstra's ``tau``)."""
    if body.quadratics:
        q = body.quadratics[0][0]
        return np.linalg.cholesky(q).T
    vs = body.vertices()
    if len(vs) <= body.dim:
        lo, hi = body._box
        return np.diag(1.0 / np.maximum(hi - lo, 1e-9))
    cov = np.cov(vs.T).reshape(body.dim, body.dim) + 1e-12 * np.eye(body.dim)
    w, v = np.linalg.eigh(cov)
    return (v / np.sqrt(np.maximum(w, 1e-18))).T


def enumerate_convex(body: ConvexBody, stats: dict | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every integer point of ``body``.

    The lattice ``tau Z^n`` is LLL-reduced; coordinates along the reduced
    basis are fixed from the last (flattest Gram-Schmidt direction) to
    the first, each range obtained by optimising over the affine section
    of the body.
    """
    n = body.dim
    if n == 0:
        if body.contains(np.zeros(0)):
            yield ()
        return
    if body.is_empty():
        return
    tau = _rounding_transform(body)
    scale = 2.0**40
    cols = [[int(round(scale * tau[r, i])) for r in range(n)] for i in range(n)]
    _, h = lll_reduce(cols)
    u = np.array(h, dtype=float).T  # columns are the reduced basis in original coordinates
    uint = [list(row) for row in zip(*h)]
    if stats is not None:
        stats.setdefault("slices", 0)
    t = [0] * n

    def section_range(k: int) -> tuple[float, float] | None:
        fixed = np.zeros(n)
        for j in range(k + 1, n):
            fixed += u[:, j] * t[j]
        f = u[:, : k + 1]
        box_lo = np.full(k + 1, -math.inf)
        box_hi = np.full(k + 1, math.inf)
        for q, p in body.quadratics:
            mq = f.T @ q @ f
            g = f.T @ q @ (fixed - p)
            c = (fixed - p) @ q @ (fixed - p) - 1
            mi = np.linalg.inv(mq)
            center = -mi @ g
            rho2 = g @ mi @ g - c
            if rho2 < 0:
                return None
            ext = np.sqrt(rho2 * np.diag(mi))
            box_lo = np.maximum(box_lo, center - ext)
            box_hi = np.minimum(box_hi, center + ext)
        lo, hi = float(box_lo[k]), float(box_hi[k])
        if body.A is not None:
            ap = body.A @ f
            bp = body.b - body.A @ fixed
            # the ellipsoids' bounding box keeps the section polytope bounded
            finite = np.isfinite(box_lo) & np.isfinite(box_hi)
            eye = np.eye(k + 1)[finite]
            ap = np.vstack([ap, eye, -eye])
            bp = np.concatenate([bp, box_hi[finite], -box_lo[finite]])
            vs = _polytope_vertices(ap, bp, body.tol)
            if len(vs) == 0:
                return None
            lo = max(lo, float(vs[:, k].min()))
            hi = min(hi, float(vs[:, k].max()))
        if lo > hi:
            return None
        return lo, hi

    def rec(k: int) -> Iterator[tuple[int, ...]]:
        rng = section_range(k)
        if rng is None:
            return
        lo, hi = rng
        if stats is not None and k == n - 1:
            stats["slices"] += max(0, math.floor(hi + 1e-7) - math.ceil(lo - 1e-7) + 1)
        for tk in range(math.ceil(lo - 1e-7), math.floor(hi + 1e-7) + 1):
            t[k] = tk
            if k == 0:
                x = tuple(sum(uint[r][j] * t[j] for j in range(n)) for r in range(n))
                if body.contains(x):
                    yield x
            else:
                yield from rec(k - 1)
        t[k] = 0

    yield from rec(n - 1)


# ---------------------------------------------------------------------------
# box enumeration in O_K
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxSpec:
    """Per-embedding bounds ``sigma_j(n) in [g_j, h_j]`` for ``n`` in ``O_K``."""

    gate_set: str
    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        gs = get_gate_set(self.gate_set)
        object.__setattr__(self, "gate_set", gs.name)
        if len(self.intervals) != gs.d:
            raise ValueError(f"need {gs.d} intervals")
        for g, h in self.intervals:
            if not g < h:
                raise ValueError("interval bounds must satisfy g < h")

    @property
    def volume(self) -> float:
        return math.prod(float(h - g) for g, h in self.intervals)


def _ok_embedding_matrix(gs: GateSetDescriptor) -> np.ndarray:
    return gs.sigma_prime_matrix()


def _unit_log_basis(gs: GateSetDescriptor) -> np.ndarray:
    rows = []
    for j in gs.embedding_exponents:
        rows.append([math.log(abs(float(pembed_mp(u, j).real))) for u in gs.fundamental_units])
    return np.array(rows).reshape(gs.d, len(gs.fundamental_units))


def box_volume_thresholds(gs: str | GateSetDescriptor) -> tuple[float, float]:
    """``(V0, V0')``: boxes of volume ``>= V0`` contain a point; volume ``< V0'`` at most one.

    ``V0`` follows the rounding argument: the box must contain the
    fundamental parallelotope of the integral basis after a unit
    rescaling, whose log-error lies in the fundamental parallelotope of
    the log-unit lattice.  ``V0' = 1`` because two distinct points of a
    box differ by a nonzero algebraic integer of norm at least one.
    """
    g = get_gate_set(gs)
    b = _ok_embedding_matrix(g)
    widths = np.abs(b).sum(axis=1)
    if g.d == 1:
        return float(widths[0]), 1.0
    lb = _unit_log_basis(g)
    ext = np.abs(lb).sum(axis=1)
    return float(np.prod(widths) * math.exp(ext.sum() / 2)), 1.0


def _unit_from_exponents(gs: GateSetDescriptor, exps: Sequence[int]) -> Coords:
    out = gs.one()
    for u, e in zip(gs.fundamental_units, exps):
        if e:
            base = u if e > 0 else pdivexact(gs.one(), u)
            assert base is not None
            out = pmul(out, ppow(base, abs(e)))
    return out


def _balancing_unit(gs: GateSetDescriptor, widths: Sequence[float]) -> tuple[Coords, list[int]]:
    """Unit whose embeddings rescale the box widths to roughly balanced values."""
    if gs.d == 1:
        return gs.one(), []
    b = _ok_embedding_matrix(gs)
    base = np.log(np.abs(b).sum(axis=1))
    lb = _unit_log_basis(gs)
    ext = np.abs(lb).sum(axis=1) / 2
    logw = np.log(np.asarray(widths, dtype=float))
    need = base + ext
    s = (logw.sum() - need.sum()) / gs.d
    target = need + s - logw
    sol, *_ = np.linalg.lstsq(lb, target, rcond=None)
    exps = [int(round(x)) for x in sol]
    return _unit_from_exponents(gs, exps), exps


def box_point_by_rounding(spec: BoxSpec) -> RingElement | None:
    """One point of the box found by unit rescaling and rounding, or ``None``.

    Guaranteed to succeed when the box volume is at least ``V0``.
    """
    gs = get_gate_set(spec.gate_set)
    widths = [float(h - g) for g, h in spec.intervals]
    mu, _ = _balancing_unit(gs, widths)
    mu_emb = [float(v) for v in gs.embed_real(mu)]
    center = np.array([mu_emb[j] * float(g + h) / 2 for j, (g, h) in enumerate(spec.intervals)])
    b = _ok_embedding_matrix(gs)
    coeff = [int(round(v)) for v in np.linalg.solve(b, center)]
    n_scaled = gs.ok_to_power(coeff)
    n = pdivexact(n_scaled, mu)
    assert n is not None
    if _in_box(n, spec, gs):
        return RingElement.from_power(gs, n, "OK")
    return None


def _in_box(n: Coords, spec: BoxSpec, gs: GateSetDescriptor) -> bool:
    bits = max(precision_bits(), max(abs(x).bit_length() for x in n) + 64)
    with mpmath.workprec(bits):
        for j, (g, h) in zip(gs.embedding_exponents, spec.intervals):
            v = pembed_mp(n, j).real
            if not (mpmath.mpf(g) <= v <= mpmath.mpf(h)):
                return False
    return True


def enumerate_box(spec: BoxSpec, limit: int | None = None) -> Iterator[RingElement]:
    """Yield every ``n`` in ``O_K`` with ``sigma_j(n)`` in the ``j``-th interval."""
    gs = get_gate_set(spec.gate_set)
    for n in _box_points(gs, spec.intervals, limit=limit):
        if _in_box(n, spec, gs):
            yield RingElement.from_power(gs, n, "OK")


def _box_points(
    gs: GateSetDescriptor,
    intervals: Sequence[tuple[float, float]],
    limit: int | None = None,
    search: LatticeBallSearch | None = None,
) -> list[Coords]:
    """Superset of the box points (power-basis coordinates), after balancing by a unit."""
    d = gs.d
    widths = [float(h - g) for g, h in intervals]
    mu, _ = _balancing_unit(gs, widths)
    mag = max(max(abs(float(g)), abs(float(h))) for g, h in intervals) + 1
    with mpmath.workprec(_bits_for(mu)):
        mu_emb = [pembed_mp(mu, j).real for j in gs.embedding_exponents]
        mu_mag = max(abs(v) for v in mu_emb)
    coord_bits = int(math.log2(mag * float(mu_mag) + 2)) + 8
    half = [w * abs(float(m)) / 2 for w, m in zip(widths, mu_emb)]
    min_half = min(half)
    p_bits = coord_bits + max(0, int(-math.log2(min_half))) + 64
    cols = []
    with mpmath.workprec(p_bits + 64):
        scale = mpmath.mpf(2) ** p_bits
        for basis_el in gs.ok_basis:
            col = []
            for j, (h_j, j_exp) in enumerate(zip(half, gs.embedding_exponents)):
                v = pembed_mp(basis_el, j_exp).real
                col.append(int(mpmath.nint(v * scale / mpmath.mpf(h_j))))
            cols.append(col)
        center = []
        for j, (g, h) in enumerate(intervals):
            c = mu_emb[j] * (mpmath.mpf(g) + mpmath.mpf(h)) / 2
            center.append(int(mpmath.nint(c * scale / mpmath.mpf(half[j]))))
    engine = search or LatticeBallSearch()
    pts = engine.search(cols, center, p_bits, math.sqrt(d), limit=limit)
    out = []
    for z in pts:
        scaled = gs.ok_to_power(z)
        n = pdivexact(scaled, mu)
        assert n is not None
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# synthesis candidates
# ---------------------------------------------------------------------------


def _target_norm(gs: GateSetDescriptor, N: int) -> Coords:
    """``xi xi* l^N``: the scaled determinant that ``|m1_hat|^2 + |m2_hat|^2`` must equal."""
    return pmul(pmul(gs.xi, pconj(gs.xi)), ppow(gs.ell, N))


def _bits_for(a: Coords) -> int:
    """Working precision that keeps every embedding of ``a`` accurate.

    The smallest embedding of a nonzero integer can be as small as the
    largest to the power ``1 - d``, so ``d <= 4`` times the coefficient
    size covers every gate set here.
    """
    return max(128, 4 * max(abs(x).bit_length() for x in a) + 64)


def _nonneg_everywhere(a: Coords, gs: GateSetDescriptor) -> bool:
    if pis_zero(a):
        return True
    return all(s > 0 for s in psign_embeddings(a, gs))


@dataclass
class Candidate2D:
    """One admissible scaled top-left entry ``m1_hat`` at power ``N``."""

    m1hat: Coords
    u: mpmath.mpc
    key: tuple
    residual: Coords  # xi xi* l^N - |m1_hat|^2


class CandidateSearch2D:
    """Candidates for a fixed region across increasing ``N`` (LLL warm start)."""

    def __init__(self, gs: str | GateSetDescriptor, region: Region, limit: int = 20000) -> None:
        self.gs = get_gate_set(gs)
        self.region = region
        self.engine = LatticeBallSearch()
        self.limit = limit

    def candidates(self, N: int) -> list[Candidate2D]:
        gs = self.gs
        d = gs.d
        region = self.region
        target = _target_norm(gs, N)
        x0, x1, y0, y1 = region.bounds
        if x1 < x0 or y1 < y0:
            return []
        width = region.x_depth if region.x_depth is not None else x1 - x0
        hx = max(width / 2, 1e-300)
        hy = max((y1 - y0) / 2, 1e-300)
        cy = (y0 + y1) / 2
        with mpmath.workprec(_bits_for(target)):
            scales = [mpmath.sqrt(pembed_mp(target, j).real) for j in gs.embedding_exponents]
        # coordinates of m1_hat are bounded through the inverse embedding matrix
        sig = gs.sigma_matrix()
        inv_norm = float(np.abs(np.linalg.inv(sig)).sum(axis=1).max())
        coord_bits = int(math.log2(float(max(scales)) * inv_norm + 2)) + 4
        p_bits = coord_bits + 64
        theta = mpmath.mpf(region.theta)
        sx = 1 / (mpmath.sqrt(2) * hx)
        sy = 1 / (mpmath.sqrt(2) * hy)
        # entries reach 2^p_bits times the largest column scale; keep them exact to 2^-64
        growth = max([float(sx), float(sy)] + [float(1 / s) for s in scales[1:]] + [1.0])
        prec = p_bits + int(math.log2(growth)) + 72
        cols = []
        with mpmath.workprec(prec):
            scale = mpmath.mpf(2) ** p_bits
            rot = mpmath.expj(-theta)
            for b in gs.mo_basis:
                col = []
                for k, j in enumerate(gs.embedding_exponents):
                    v = pembed_mp(b, j) / scales[k]
                    if k == 0:
                        w = v * rot
                        yy = -w.imag if region.reflect else w.imag
                        col += [int(mpmath.nint(w.real * sx * scale)), int(mpmath.nint(yy * sy * scale))]
                    else:
                        col += [int(mpmath.nint(v.real * scale)), int(mpmath.nint(v.imag * scale))]
                cols.append(col)
            cx = mpmath.mpf(x1) - mpmath.mpf(hx)
            center = [int(mpmath.nint(cx * sx * scale)), int(mpmath.nint(cy * sy * scale))] + [0] * (2 * d - 2)
        pts = self.engine.search(cols, center, p_bits, math.sqrt(d), limit=self.limit)
        out: list[Candidate2D] = []
        bits = max(precision_bits(), 2 * coord_bits + 64)
        for z in pts:
            m1hat = gs.mo_to_power(z)
            residual = psub(target, pmul(m1hat, pconj(m1hat)))
            if not _nonneg_everywhere(residual, gs):
                continue
            with mpmath.workprec(bits):
                u = pembed_mp(m1hat, gs.embedding_exponents[0]) / mpmath.sqrt(pembed_mp(target, gs.embedding_exponents[0]).real)
                if not region.contains(u, prec=bits):
                    continue
                _, y = region.to_canonical(u)
                key = (abs(y), tuple(z))
            out.append(Candidate2D(m1hat, u, key, residual))
        out.sort(key=lambda c: c.key)
        return out


def candidates_2d(gs: str | GateSetDescriptor, region: Region, N: int) -> list[RingElement]:
    """Scaled top-left entries ``m1_hat`` at power ``N`` whose normalized embedding lies in ``region``.

    Ordered by ``|Im(u e^{-i theta})|`` and then by coordinates.
    """
    g = get_gate_set(gs)
    return [RingElement.from_power(g, c.m1hat, "MO") for c in CandidateSearch2D(g, region).candidates(N)]


@dataclass
class Candidate1D:
    nhat: Coords
    value: mpmath.mpf  # |u|^2
    key: tuple


def candidates_1d_raw(
    gs: GateSetDescriptor,
    interval_sq: Interval,
    N: int,
    search: LatticeBallSearch | None = None,
    target_value: float | None = None,
    limit: int | None = None,
) -> list[Candidate1D]:
    """Totally positive ``n_hat`` with ``|u|^2`` in ``interval_sq``, closest to ``target_value`` first.

    Points are pre-screened and ordered in double precision; the exact
    checks run lazily until ``limit`` candidates are accepted.
    """
    lo, hi = float(interval_sq.lower), float(interval_sq.upper)
    if hi < lo:
        return []
    target = _target_norm(gs, N)
    with mpmath.workprec(_bits_for(target)):
        s = [pembed_mp(target, j).real for j in gs.embedding_exponents]
    width1 = (hi - lo) * float(s[0])
    pad = 1e-9 * float(s[0]) + 1e-30
    intervals = [(lo * float(s[0]) - pad, hi * float(s[0]) + pad if width1 > 0 else lo * float(s[0]) + 2 * pad)]
    for k in range(1, gs.d):
        intervals.append((-1e-9 * float(s[k]), float(s[k]) * (1 + 1e-9)))
    pts = _box_points(gs, intervals, search=search)
    j0 = gs.embedding_exponents[0]
    m = gs.m
    cosines = [math.cos(math.pi * i * j0 / m) for i in range(m)]
    s0 = float(s[0])
    slack = 1e-9 * max(hi, 1e-300) + 1e-15
    ref = target_value if target_value is not None else (lo + hi) / 2
    sref = math.sqrt(max(ref, 0.0))
    screened = []
    for n in pts:
        v = sum(float(c) * w for c, w in zip(n, cosines) if c) / s0
        if lo - slack <= v <= hi + slack:
            screened.append((abs(math.sqrt(max(v, 0.0)) - sref), n))
    screened.sort(key=lambda t: (t[0], gs.power_to_ok(t[1])))
    out: list[Candidate1D] = []
    bits = max(precision_bits(), max(abs(x).bit_length() for x in target) + 64)
    for dist, n in screened:
        if not _nonneg_everywhere(n, gs) or not _nonneg_everywhere(psub(target, n), gs):
            continue
        with mpmath.workprec(bits):
            v = pembed_mp(n, j0).real / s[0]
            if not (mpmath.mpf(lo) <= v <= mpmath.mpf(hi)):
                continue
        out.append(Candidate1D(n, v, (dist, gs.power_to_ok(n))))
        if limit is not None and len(out) >= limit:
            break
    return out


def candidates_1d(gs: str | GateSetDescriptor, interval: Interval, N: int) -> list[RingElement]:
    """Totally positive ``n_hat`` in ``O_K`` with ``sigma_1(n_hat) / sigma_1(xi xi* l^N)`` in ``interval``.

    ``interval`` bounds the squared magnitude ``|u|^2``; the remaining
    embeddings are confined to ``[0, sigma_k(xi xi* l^N)]``.
    """
    g = get_gate_set(gs)
    return [RingElement.from_power(g, c.nhat, "OK") for c in candidates_1d_raw(g, interval, N)]
