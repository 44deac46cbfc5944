"""Approximation drivers: diagonal, fallback, magnitude, their mixed variants and SU(2).

Every driver walks the determinant power ``N = 0, 1, ...``, enumerates
candidate top-left entries in the relevant region, completes them with a
norm-equation solution, synthesizes the exact sequence and re-certifies
it from the evaluated sequence with the closed-form channel distances.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import mpmath
import numpy as np

from .channels import (
    MixSpec,
    diamond_diag_diag,
    diamond_diag_general,
    diamond_unitary_unitary,
    fallback_mixture_bound,
    mixing_probability,
    projective_mixture_distance,
    sequence_unitary,
    twirl_expand,
    twirled_mixture_distance,
)
from .enumerate import Candidate2D, CandidateSearch2D, _target_norm, candidates_1d_raw
from .exactsynth import GateSequence, _eval_tokens, order_data, sequence_hat, synth_hat
from .normeq import FactoringTimeout, coset_variants, solve_norm_in_coset_power, solve_relative_norm_power
from .regions import (
    Interval,
    Region,
    diagonal_region,
    fixed_under_rotation_region,
    magnitude_interval,
    mixed_diagonal_regions,
    mixed_magnitude_intervals,
    mixed_projective_regions,
    precision_bits,
    projective_region,
)
from .rings import Coords, GateSetDescriptor, get_gate_set, pconj, pembed_mp, pis_zero, pmul, padd, psub

__all__ = [
    "ApproxSolution",
    "Branch",
    "SearchExhausted",
    "SynthConfig",
    "approx_diagonal",
    "approx_fallback",
    "approx_general_su2",
    "approx_magnitude",
    "approx_mixed_diagonal",
    "approx_mixed_fallback",
    "approx_mixed_magnitude",
    "euler_angles",
]

METRICS = ("power", "gate_count", "t_count")


class SearchExhausted(RuntimeError):
    """No solution was found below the configured power cap."""


@dataclass(frozen=True)
class SynthConfig:
    """Tunable search parameters; the defaults follow the documented protocol choices."""

    factoring_budget: int = 200_000
    candidates_per_n: int = 64
    max_n: int | None = None
    safety: float = 1e-4
    fallback_split: float = 0.5
    mixed_fallback_split: tuple[float, float, float] = (0.5, 0.25, 0.25)
    general_split: tuple[float, float, float] = (0.14, 0.43, 0.43)
    partner_lookback: int = 4
    partner_candidates: int = 4

    def n_cap(self, eps: float) -> int:
        if self.max_n is not None:
            return self.max_n
        return int(3 * math.log2(1 / min(eps, 1.0))) + 40


DEFAULT_CONFIG = SynthConfig()


@dataclass
class Branch:
    """One deterministic gate sequence of a (possibly mixed) solution."""

    sequence: GateSequence
    weight: float
    role: str
    u: complex
    v: complex

    def to_dict(self) -> dict:
        return {
            "sequence": str(self.sequence),
            "weight": self.weight,
            "role": self.role,
            "u": [self.u.real, self.u.imag],
            "v": [self.v.real, self.v.imag],
            "cost": self.sequence.cost,
            "det_power": self.sequence.det_power,
        }


@dataclass
class ApproxSolution:
    """Result of one approximation driver.

    ``branches`` lists the emitted sequences with their mixture weights.
    ``fallbacks`` holds the recovery solutions applied on failure of the
    projective branch with the same index.  ``cost`` is the worst case
    along any execution path and ``expected_cost`` the mean under the
    mixture and success probabilities.
    """

    protocol: str
    gate_set: str
    target: dict
    eps: float
    certified_eps: float
    branches: list[Branch]
    N: int
    cost: dict[str, float]
    expected_cost: dict[str, float]
    p: float | None = None
    q_achieved: float | None = None
    fallbacks: list["ApproxSolution | None"] = field(default_factory=list)
    components: dict[str, "ApproxSolution"] = field(default_factory=dict)
    phases: tuple[float, float] | None = None
    degenerate: bool = False

    @property
    def sequence(self) -> GateSequence:
        """The single sequence of a deterministic solution."""
        if len(self.branches) != 1:
            raise ValueError(f"{self.protocol} solution has {len(self.branches)} branches")
        return self.branches[0].sequence

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "gate_set": self.gate_set,
            "target": self.target,
            "eps": self.eps,
            "certified_eps": self.certified_eps,
            "N": self.N,
            "p": self.p,
            "q_achieved": self.q_achieved,
            "degenerate": self.degenerate,
            "phases": list(self.phases) if self.phases is not None else None,
            "cost": self.cost,
            "expected_cost": self.expected_cost,
            "branches": [b.to_dict() for b in self.branches],
            "fallbacks": [f.to_dict() if f is not None else None for f in self.fallbacks],
            "components": {k: v.to_dict() for k, v in self.components.items()},
        }


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def _check_eps(eps: float) -> None:
    if not (0 < eps <= 2):
        raise ValueError("eps must lie in (0, 2]")


def _check_q(q: float) -> None:
    if not (0 < q < 1):
        raise ValueError("q must lie in (0, 1)")


def _bits(h: Sequence[Coords]) -> int:
    m = max((abs(x).bit_length() for part in h for x in part), default=1)
    return max(precision_bits(), 2 * m + 64)


@dataclass
class _Found:
    """A synthesized candidate with its exactly derived entries."""

    N: int
    sequence: GateSequence
    u: mpmath.mpc
    v: mpmath.mpc
    prec: int


def _entries(gs: GateSetDescriptor, seq: GateSequence) -> tuple[mpmath.mpc, mpmath.mpc, int]:
    h = sequence_hat(seq)
    bits = _bits(h)
    j = gs.embedding_exponents[0]
    with mpmath.workprec(bits):
        norm = padd(pmul(h[0], pconj(h[0])), pmul(h[1], pconj(h[1])))
        s = mpmath.sqrt(pembed_mp(norm, j).real)
        u = pembed_mp(h[0], j) / s
        v = pembed_mp(h[1], j) / s
    return u, v, bits


def _synthesize(gs: GateSetDescriptor, h: tuple[Coords, Coords], N: int) -> _Found:
    seq = synth_hat(gs, h)
    u, v, bits = _entries(gs, seq)
    return _Found(N, seq, u, v, bits)


def _complete(gs: GateSetDescriptor, cand: Candidate2D, N: int, cfg: SynthConfig) -> _Found | None:
    """Complete ``m1_hat`` to an order element by solving the norm equation for ``m2_hat``."""
    data = order_data(gs)
    if pis_zero(cand.residual):
        m2 = tuple(0 for _ in cand.m1hat)
        if data.coords((cand.m1hat, m2)) is None:
            return None
    else:
        try:
            m2 = solve_norm_in_coset_power(cand.m1hat, cand.residual, gs, cfg.factoring_budget)
        except FactoringTimeout:
            return None
        if m2 is None:
            return None
    return _synthesize(gs, (cand.m1hat, m2), N)


def _search(
    gs: GateSetDescriptor,
    region: Region,
    accept: Callable[[_Found], bool],
    cfg: SynthConfig,
    n_start: int,
    n_cap: int,
) -> _Found | None:
    search = CandidateSearch2D(gs, region)
    for N in range(n_start, n_cap + 1):
        for cand in search.candidates(N)[: cfg.candidates_per_n]:
            found = _complete(gs, cand, N, cfg)
            if found is not None and accept(found):
                return found
    return None


def _canonical(u: mpmath.mpc, theta: float, prec: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    with mpmath.workprec(prec):
        w = mpmath.mpc(u) * mpmath.expj(-mpmath.mpf(theta))
        return w.real, w.imag


def _arg(z: mpmath.mpc) -> mpmath.mpf:
    """Argument in ``(-pi, pi]``."""
    return mpmath.arg(z)


def _cost_of(seq: GateSequence) -> dict[str, float]:
    c = seq.cost
    return {k: float(c[k]) for k in METRICS}


def _combine(weighted: Sequence[tuple[float, dict[str, float]]]) -> dict[str, float]:
    return {k: float(sum(w * c[k] for w, c in weighted)) for k in METRICS}


def _max_cost(costs: Sequence[dict[str, float]]) -> dict[str, float]:
    return {k: max(c[k] for c in costs) for k in METRICS}


def _add_cost(a: dict[str, float], b: dict[str, float]) -> dict[str, float]:
    return {k: a[k] + b[k] for k in METRICS}


def _require_twirl(gs: GateSetDescriptor) -> None:
    if "S" not in order_data(gs).cliffords:
        raise ValueError(f"mixing with the S/Z twirl is unavailable for the {gs.name} gate set")


def _single(protocol: str, gs: GateSetDescriptor, target: dict, eps: float, found: _Found, cert: float, **kw) -> ApproxSolution:
    cost = _cost_of(found.sequence)
    return ApproxSolution(
        protocol,
        gs.name,
        target,
        eps,
        float(cert),
        [Branch(found.sequence, 1.0, "primary", complex(found.u), complex(found.v))],
        found.sequence.det_power,
        cost,
        dict(cost),
        **kw,
    )


# ---------------------------------------------------------------------------
# diagonal
# ---------------------------------------------------------------------------


def approx_diagonal(gs, theta: float, eps: float, config: SynthConfig | None = None) -> ApproxSolution:
    """Shortest sequence whose channel is within ``eps`` of ``e^{i theta Z}``."""
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    region = diagonal_region(theta, eps * (1 - cfg.safety))

    def dist(f: _Found):
        with mpmath.workprec(f.prec):
            return diamond_diag_general(mpmath.mpf(theta), f.u)

    found = _search(g, region, lambda f: dist(f) <= eps, cfg, 0, cfg.n_cap(eps))
    if found is None:
        raise SearchExhausted(f"no diagonal approximation up to N={cfg.n_cap(eps)}")
    return _single("diagonal", g, {"theta": theta}, eps, found, dist(found))


# ---------------------------------------------------------------------------
# fallback
# ---------------------------------------------------------------------------


def _projective_distance(theta: float, f: _Found) -> mpmath.mpf:
    with mpmath.workprec(f.prec):
        return diamond_diag_diag(_arg(f.u), mpmath.mpf(theta))


def approx_fallback(gs, theta: float, eps: float, q: float, config: SynthConfig | None = None) -> ApproxSolution:
    """Projective rotation with success probability at least ``q`` plus a diagonal fallback."""
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    _check_q(q)
    eps1 = eps * cfg.fallback_split
    region = projective_region(theta, eps1 * (1 - cfg.safety), q)

    def accept(f: _Found) -> bool:
        with mpmath.workprec(f.prec):
            return abs(f.u) ** 2 >= q and _projective_distance(theta, f) <= eps1

    found = _search(g, region, accept, cfg, 0, cfg.n_cap(eps1))
    if found is None:
        raise SearchExhausted("no projective rotation found")
    return _finish_fallback(g, theta, eps, eps1, q, found, cfg)


def _finish_fallback(
    g: GateSetDescriptor, theta: float, eps: float, eps1: float, q: float, found: _Found, cfg: SynthConfig
) -> ApproxSolution:
    d1 = _projective_distance(theta, found)
    with mpmath.workprec(found.prec):
        fail = abs(found.v) ** 2
        success = 1 - fail
    cost = _cost_of(found.sequence)
    target = {"theta": theta, "q": q}
    branch = Branch(found.sequence, 1.0, "projective", complex(found.u), complex(found.v))
    if fail == 0:
        return ApproxSolution(
            "fallback", g.name, target, eps, float(d1), [branch], found.sequence.det_power, cost, dict(cost),
            q_achieved=1.0, fallbacks=[None],
        )
    angle = float(theta - _arg(found.v))
    eps2 = min(2.0, float((eps - eps1) / fail))
    rec = approx_diagonal(g, angle, eps2, cfg)
    cert = float(d1 + fail * rec.certified_eps)
    return ApproxSolution(
        "fallback",
        g.name,
        target,
        eps,
        cert,
        [branch],
        found.sequence.det_power,
        _add_cost(cost, rec.cost),
        _combine([(1.0, cost), (float(fail), rec.expected_cost)]),
        q_achieved=float(success),
        fallbacks=[rec],
    )


# ---------------------------------------------------------------------------
# mixing
# ---------------------------------------------------------------------------


@dataclass
class _Pair:
    under: _Found | None
    over: _Found | None
    spec: MixSpec | None


def _mix_spec(under: _Found, over: _Found, theta: float) -> MixSpec:
    return _mix_spec_u(under.u, over.u, theta, max(under.prec, over.prec))


SIDES = ("under", "over")


def _pair_search(
    level: Callable[[str, int], list[_Found]],
    partners: Callable[[_Found, str], Callable[[int], list[_Found]]],
    single_ok: Callable[[_Found], bool],
    pair_ok: Callable[[_Found, _Found], bool],
    cfg: SynthConfig,
    n_cap: int,
) -> tuple[_Found | None, _Found | None]:
    """Cheapest certified under/over pair, walking ``N`` upwards.

    At each level the new candidates of both sides are paired with every
    earlier candidate of the opposite side, and the cheapest few get a
    dedicated partner search in the region that their fixed error allows.
    Any two candidates from the evenly split regions certify together, so
    the walk stops no later than the level where both sides are populated.
    A single candidate accurate on its own is returned with the other
    slot ``None``.
    """
    stored: dict[str, list[_Found]] = {"under": [], "over": []}
    active: list[tuple[_Found, str, Callable[[int], list[_Found]]]] = []

    def ordered(f: _Found, other: _Found, side: str) -> tuple[_Found, _Found]:
        return (f, other) if side == "under" else (other, f)

    for N in range(n_cap + 1):
        fresh = {side: level(side, N) for side in SIDES}
        for side in SIDES:
            for f in fresh[side]:
                if single_ok(f):
                    return ordered(f, None, side) if side == "under" else (None, f)  # type: ignore[arg-type]
        for f in fresh["under"]:
            for other in stored["over"] + fresh["over"]:
                if pair_ok(f, other):
                    return f, other
        for f in fresh["over"]:
            for other in stored["under"]:
                if pair_ok(other, f):
                    return other, f
        for f, side, gen in active:
            for other in gen(N):
                if pair_ok(*ordered(f, other, side)):
                    return ordered(f, other, side)
        for side in SIDES:
            room = cfg.partner_candidates - sum(1 for a in active if a[1] == side)
            for f in fresh[side][: max(0, room)]:
                gen = partners(f, side)
                active.append((f, side, gen))
                for level_n in range(max(0, N - cfg.partner_lookback), N + 1):
                    for other in gen(level_n):
                        if pair_ok(*ordered(f, other, side)):
                            return ordered(f, other, side)
            stored[side] += fresh[side]
    raise SearchExhausted(f"no mixed pair up to N={n_cap}")


def _find_pair(
    g: GateSetDescriptor,
    theta: float,
    eps_region: float,
    regions: tuple[Region, Region],
    kind: str,
    q: float | None,
    single_ok: Callable[[_Found], bool],
    spec_ok: Callable[[MixSpec], bool],
    in_side: Callable[[_Found], bool],
    cfg: SynthConfig,
    n_cap: int,
) -> _Pair:
    """Under/over pair of top-left entries for the two-dimensional mixed protocols."""
    searches = dict(zip(SIDES, (CandidateSearch2D(g, r) for r in regions)))

    def strictly_on(side: str, u: mpmath.mpc, prec: int) -> bool:
        _, y = _canonical(u, theta, prec)
        return y <= 0 if side == "under" else y > 0

    def completed(cands: Sequence[Candidate2D], N: int, keep: Callable[[Candidate2D], bool]) -> list[_Found]:
        out = []
        for cand in cands[: cfg.candidates_per_n]:
            if not keep(cand):
                continue
            found = _complete(g, cand, N, cfg)
            if found is not None and in_side(found):
                out.append(found)
        return out

    def level(side: str, N: int) -> list[_Found]:
        return completed(searches[side].candidates(N), N, lambda c: True)

    def partners(f: _Found, side: str) -> Callable[[int], list[_Found]]:
        x, y = _canonical(f.u, theta, f.prec)
        y1 = float(-y if side == "under" else y)
        if y1 <= 0 or float(x) <= 0:
            return lambda N: []
        region = fixed_under_rotation_region(theta, eps_region, float(x), y1, kind=kind, q=q, reflect=(side == "over"))
        search = CandidateSearch2D(g, region)
        other_side = "over" if side == "under" else "under"

        def keep(c: Candidate2D) -> bool:
            prec = max(precision_bits(), 256)
            if not strictly_on(other_side, c.u, prec):
                return False
            pair = (f.u, c.u) if side == "under" else (c.u, f.u)
            return spec_ok(_mix_spec_u(*pair, theta, prec))

        return lambda N: completed(search.candidates(N), N, keep)

    def pair_ok(under: _Found, over: _Found) -> bool:
        if not (strictly_on("under", under.u, under.prec) and strictly_on("over", over.u, over.prec)):
            return False
        return spec_ok(_mix_spec(under, over, theta))

    under, over = _pair_search(level, partners, single_ok, pair_ok, cfg, n_cap)
    if under is None or over is None:
        return _Pair(under, over, None)
    return _Pair(under, over, _mix_spec(under, over, theta))


def _mix_spec_u(u1: mpmath.mpc, u2: mpmath.mpc, theta: float, prec: int) -> MixSpec:
    with mpmath.workprec(prec):
        rot = mpmath.expj(-mpmath.mpf(theta))
        w1, w2 = u1 * rot, u2 * rot
        return MixSpec(abs(w1), mpmath.arg(w1), abs(w2), mpmath.arg(w2))


def approx_mixed_diagonal(gs, theta: float, eps: float, config: SynthConfig | None = None) -> ApproxSolution:
    """Mixture of an under- and an over-rotation, each S/Z-twirled."""
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    _require_twirl(g)
    eps_r = eps * (1 - cfg.safety)

    def single_ok(f: _Found) -> bool:
        with mpmath.workprec(f.prec):
            return diamond_diag_general(mpmath.mpf(theta), f.u) <= eps

    def pair_ok(spec: MixSpec) -> bool:
        with mpmath.workprec(max(precision_bits(), 256)):
            p = mixing_probability(spec, "unitary")
            return twirled_mixture_distance(spec.with_p(p)) <= eps

    pair = _find_pair(
        g, theta, eps_r, mixed_diagonal_regions(theta, eps_r), "unitary", None,
        single_ok, pair_ok, lambda f: True, cfg, cfg.n_cap(eps * eps),
    )
    target = {"theta": theta}
    if pair.spec is None:
        f = pair.under or pair.over
        assert f is not None
        return _single("mixed-diagonal", g, target, eps, f, single_ok_value(theta, f), p=1.0, degenerate=True)
    with mpmath.workprec(256):
        p = mixing_probability(pair.spec, "unitary")
        cert = twirled_mixture_distance(pair.spec.with_p(p))
    assert pair.under is not None and pair.over is not None
    branches = []
    for f, w, role in ((pair.under, p, "under"), (pair.over, 1 - p, "over")):
        for seq, tw in twirl_expand(f.sequence):
            u, v, _ = _entries(g, seq)
            branches.append(Branch(seq, float(w * tw), role, complex(u), complex(v)))
    cu, co = _cost_of(pair.under.sequence), _cost_of(pair.over.sequence)
    return ApproxSolution(
        "mixed-diagonal",
        g.name,
        target,
        eps,
        float(cert),
        branches,
        max(pair.under.sequence.det_power, pair.over.sequence.det_power),
        _max_cost([cu, co]),
        _combine([(float(p), cu), (float(1 - p), co)]),
        p=float(p),
    )


def single_ok_value(theta: float, f: _Found) -> float:
    with mpmath.workprec(f.prec):
        return float(diamond_diag_general(mpmath.mpf(theta), f.u))


def approx_mixed_fallback(
    gs, theta: float, eps: float, q: float, config: SynthConfig | None = None
) -> ApproxSolution:
    """Mixture of two projective rotations, each followed on failure by a mixed-diagonal fallback."""
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    _check_q(q)
    _require_twirl(g)
    s1, s2, s3 = cfg.mixed_fallback_split
    eps1 = eps * s1
    eps_r = eps1 * (1 - cfg.safety)

    def in_side(f: _Found) -> bool:
        with mpmath.workprec(f.prec):
            return abs(f.u) ** 2 >= q

    def single_ok(f: _Found) -> bool:
        return in_side(f) and _projective_distance(theta, f) <= eps1

    def pair_ok(spec: MixSpec) -> bool:
        with mpmath.workprec(256):
            p = mixing_probability(spec, "fallback")
            return projective_mixture_distance(spec.with_p(p)) <= eps1

    pair = _find_pair(
        g, theta, eps_r, mixed_projective_regions(theta, eps_r, q), "fallback", q,
        single_ok, pair_ok, in_side, cfg, cfg.n_cap(eps1 * eps1),
    )
    target = {"theta": theta, "q": q}
    if pair.spec is None:
        f = pair.under or pair.over
        assert f is not None
        sol = _finish_fallback(g, theta, eps, eps1, q, f, replace(cfg))
        sol.protocol = "mixed-fallback"
        sol.p = 1.0
        sol.degenerate = True
        return sol
    assert pair.under is not None and pair.over is not None
    with mpmath.workprec(256):
        p = mixing_probability(pair.spec, "fallback")
        spec = pair.spec.with_p(p)
    fallbacks: list[ApproxSolution | None] = []
    b = []
    branches = []
    expected = []
    worst = []
    for f, w, budget, role in ((pair.under, p, eps * s2, "under"), (pair.over, 1 - p, eps * s3, "over")):
        with mpmath.workprec(f.prec):
            fail = abs(f.v) ** 2
        branches.append(Branch(f.sequence, float(w), role, complex(f.u), complex(f.v)))
        c = _cost_of(f.sequence)
        if fail == 0 or w == 0:
            fallbacks.append(None)
            b.append(0.0)
            expected.append((float(w), c))
            worst.append(c)
            continue
        angle = float(theta - _arg(f.v))
        target_eps = min(2.0, float(budget / (w * fail)))
        rec = approx_mixed_diagonal(g, angle, target_eps, cfg)
        fallbacks.append(rec)
        b.append(rec.certified_eps)
        expected.append((float(w), _combine([(1.0, c), (float(fail), rec.expected_cost)])))
        worst.append(_add_cost(c, rec.cost))
    cert = fallback_mixture_bound(spec, b)
    return ApproxSolution(
        "mixed-fallback",
        g.name,
        target,
        eps,
        float(cert),
        branches,
        max(pair.under.sequence.det_power, pair.over.sequence.det_power),
        _max_cost(worst),
        _combine(expected),
        p=float(p),
        q_achieved=float(min(spec.success1, spec.success2)),
        fallbacks=fallbacks,
    )


# ---------------------------------------------------------------------------
# magnitude
# ---------------------------------------------------------------------------


def _norm_variants(n: Coords, gs: GateSetDescriptor, cfg: SynthConfig) -> list[Coords] | None:
    if pis_zero(n):
        return [n]
    try:
        sol = solve_relative_norm_power(n, gs, cfg.factoring_budget)
    except FactoringTimeout:
        return None
    if sol is None:
        return None
    out: list[Coords] = []
    seen = set()
    for v in coset_variants(sol, gs) + coset_variants(pconj(sol), gs):
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def _complete_magnitude(gs: GateSetDescriptor, nhat: Coords, N: int, cfg: SynthConfig) -> _Found | None:
    """Order element with ``|m1_hat|^2 = nhat`` and determinant ``l^N``."""
    target = _target_norm(gs, N)
    rest = psub(target, nhat)
    first = _norm_variants(nhat, gs, cfg)
    if first is None:
        return None
    first = [v for v in first if gs.in_mo(v)]
    if not first:
        return None
    second = _norm_variants(rest, gs, cfg)
    if second is None:
        return None
    data = order_data(gs)
    for m1 in first:
        for m2 in second:
            if data.coords((m1, m2)) is not None:
                return _synthesize(gs, (m1, m2), N)
    return None


def _magnitude_angle(f: _Found) -> mpmath.mpf:
    with mpmath.workprec(f.prec):
        return mpmath.acos(min(mpmath.mpf(1), abs(f.u)))


def _euler_phases(u: mpmath.mpc, v: mpmath.mpc) -> tuple[float, float]:
    """``(a, b)`` with ``[[u, -v*], [v, u*]] = e^{iaZ} e^{i t X} e^{ibZ}``."""
    if abs(u) == 0:
        total = mpmath.mpf(0)
    else:
        total = mpmath.arg(u)
    if abs(v) == 0:
        diff = mpmath.mpf(0)
    else:
        diff = mpmath.pi / 2 - mpmath.arg(v)
    return float((total + diff) / 2), float((total - diff) / 2)


def _reduce_x_angle(theta: float) -> tuple[float, float]:
    """Map ``theta`` to ``[0, pi/2]``; returns ``(t, shift)``.

    ``e^{i theta X}`` equals ``e^{i shift Z} e^{i t X} e^{i shift Z}`` up to sign.
    """
    t = math.remainder(theta, math.pi)
    if t < 0:
        return -t, -math.pi / 2
    return t, 0.0


def _search_magnitude(
    g: GateSetDescriptor,
    interval: Interval,
    accept: Callable[[_Found], bool],
    cfg: SynthConfig,
    n_start: int,
    n_cap: int,
    theta_ref: float,
) -> _Found | None:
    for N in range(n_start, n_cap + 1):
        cands = candidates_1d_raw(g, interval.squared(), N, target_value=math.cos(theta_ref) ** 2, limit=cfg.candidates_per_n)
        for cand in cands[: cfg.candidates_per_n]:
            found = _complete_magnitude(g, cand.nhat, N, cfg)
            if found is not None and accept(found):
                return found
    return None


def approx_magnitude(gs, theta: float, eps: float, config: SynthConfig | None = None) -> ApproxSolution:
    """Sequence equal to ``e^{i a Z} e^{i t X} e^{i b Z}`` with ``t`` within ``eps`` of ``theta``.

    ``phases`` holds ``(a, b)`` relative to the requested angle.
    """
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    t, shift = _reduce_x_angle(theta)
    interval = magnitude_interval(t, eps * (1 - cfg.safety))

    def dist(f: _Found):
        with mpmath.workprec(f.prec):
            return 2 * abs(mpmath.sin(_magnitude_angle(f) - mpmath.mpf(t)))

    found = _search_magnitude(g, interval, lambda f: dist(f) <= eps, cfg, 0, cfg.n_cap(eps), t)
    if found is None:
        raise SearchExhausted("no magnitude approximation found")
    a, b = _euler_phases(found.u, found.v)
    return _single(
        "magnitude", g, {"theta": theta}, eps, found, dist(found), phases=(a + shift, b + shift)
    )


def _magnitude_pair_distance(d1: float, d2: float) -> float:
    spec = MixSpec(1.0, d1, 1.0, d2, q1=1.0, q2=1.0)
    return projective_mixture_distance(spec.with_p(mixing_probability(spec, "fallback")))


def _partner_interval(t: float, delta: float, eps: float) -> Interval:
    """Magnitudes ``|u|`` that pair with a fixed rotation error ``delta`` within ``eps``."""
    under = delta < 0
    limit = t if under else math.pi / 2 - t

    def ok(x: float) -> bool:
        if x == 0:
            return True
        return (_magnitude_pair_distance(delta, x) if under else _magnitude_pair_distance(-x, delta)) <= eps

    lo, hi = 0.0, limit
    if ok(hi):
        best = hi
    else:
        for _ in range(80):
            mid = (lo + hi) / 2
            if ok(mid):
                lo = mid
            else:
                hi = mid
        best = lo
    if under:  # partner over-rotates: angle in [t, t + best]
        return Interval(math.cos(min(math.pi / 2, t + best)), math.cos(t))
    return Interval(math.cos(t), math.cos(max(0.0, t - best)))


def approx_mixed_magnitude(gs, theta: float, eps: float, config: SynthConfig | None = None) -> ApproxSolution:
    """Mixture of an under- and an over-rotating magnitude approximation."""
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    t, shift = _reduce_x_angle(theta)
    eps_r = eps * (1 - cfg.safety)
    intervals = dict(zip(SIDES, mixed_magnitude_intervals(t, eps_r)))
    ref = math.cos(t) ** 2

    def delta(f: _Found) -> mpmath.mpf:
        with mpmath.workprec(f.prec):
            return _magnitude_angle(f) - mpmath.mpf(t)

    def on_side(side: str, d: float) -> bool:
        return d <= 0 if side == "under" else d > 0

    def single_ok(f: _Found) -> bool:
        with mpmath.workprec(f.prec):
            return 2 * abs(mpmath.sin(delta(f))) <= eps

    def pair_value(du, do) -> tuple[float, float]:
        spec = MixSpec(1.0, du, 1.0, do, q1=1.0, q2=1.0)
        with mpmath.workprec(256):
            p = mixing_probability(spec, "fallback")
            return float(p), float(projective_mixture_distance(spec.with_p(p)))

    def pair_ok(fu: _Found, fo: _Found) -> bool:
        du, do = delta(fu), delta(fo)
        return on_side("under", float(du)) and on_side("over", float(do)) and pair_value(du, do)[1] <= eps

    def completed(interval: Interval, N: int, keep: Callable[[mpmath.mpf], bool]) -> list[_Found]:
        out = []
        for cand in candidates_1d_raw(g, interval.squared(), N, target_value=ref, limit=cfg.candidates_per_n):
            with mpmath.workprec(256):
                d = mpmath.acos(min(mpmath.mpf(1), mpmath.sqrt(cand.value))) - mpmath.mpf(t)
            if not keep(d):
                continue
            found = _complete_magnitude(g, cand.nhat, N, cfg)
            if found is not None:
                out.append(found)
        return out

    def level(side: str, N: int) -> list[_Found]:
        return completed(intervals[side], N, lambda d: on_side(side, float(d)))

    def partners(f: _Found, side: str) -> Callable[[int], list[_Found]]:
        d = float(delta(f))
        interval = _partner_interval(t, d, eps_r)
        other = "over" if side == "under" else "under"

        def keep(dd: mpmath.mpf) -> bool:
            if not on_side(other, float(dd)):
                return False
            pair = (delta(f), dd) if side == "under" else (dd, delta(f))
            return pair_value(*pair)[1] <= eps

        return lambda N: completed(interval, N, keep)

    target = {"theta": theta}
    fu, fo = _pair_search(level, partners, single_ok, pair_ok, cfg, cfg.n_cap(eps * eps))
    if fu is None or fo is None:
        f = fu or fo
        assert f is not None
        a, b = _euler_phases(f.u, f.v)
        with mpmath.workprec(f.prec):
            cert = 2 * abs(mpmath.sin(delta(f)))
        return _single(
            "mixed-magnitude", g, target, eps, f, cert, p=1.0, degenerate=True, phases=(a + shift, b + shift)
        )
    p, cert = pair_value(delta(fu), delta(fo))
    branches = []
    phases = []
    for f, w, role in ((fu, p, "under"), (fo, 1 - p, "over")):
        a, b = _euler_phases(f.u, f.v)
        phases.append((a + shift, b + shift))
        branches.append(Branch(f.sequence, float(w), role, complex(f.u), complex(f.v)))
    cu, co = _cost_of(fu.sequence), _cost_of(fo.sequence)
    sol = ApproxSolution(
        "mixed-magnitude", g.name, target, eps, cert, branches,
        max(fu.sequence.det_power, fo.sequence.det_power),
        _max_cost([cu, co]), _combine([(p, cu), (1 - p, co)]), p=p,
    )
    sol.target["branch_phases"] = phases
    return sol


# ---------------------------------------------------------------------------
# general SU(2)
# ---------------------------------------------------------------------------


def euler_angles(U: np.ndarray) -> tuple[float, float, float]:
    """``(phi1, theta, phi2)`` with ``U = e^{i phi1 Z} e^{i theta X} e^{i phi2 Z}`` and ``theta`` in ``[0, pi/2]``."""
    U = np.asarray(U, dtype=complex)
    if np.abs(U.conj().T @ U - np.eye(2)).max() > 1e-10 or abs(np.linalg.det(U) - 1) > 1e-10:
        raise ValueError("U must be special unitary")
    u, v = U[0, 0], U[1, 0]
    theta = math.acos(min(1.0, abs(u)))
    total = cmath.phase(u) if abs(u) > 1e-300 else 0.0
    diff = math.pi / 2 - cmath.phase(v) if abs(v) > 1e-300 else 0.0
    return (total + diff) / 2, theta, (total - diff) / 2


def _rz(phi: float) -> np.ndarray:
    return np.diag([cmath.exp(1j * phi), cmath.exp(-1j * phi)])


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 1j * s], [1j * s, c]])


def _concat(g: GateSetDescriptor, parts: Sequence[GateSequence | list[str]]) -> GateSequence:
    """Exact product of sequences (matrix-product order), re-synthesized."""
    data = order_data(g)
    tokens: list[str] = []
    for part in parts:
        tokens += part.tokens() if isinstance(part, GateSequence) else list(part)
    return synth_hat(g, _eval_tokens(data, tokens))


def approx_general_su2(
    gs, U: np.ndarray, eps: float, mixed: bool = False, method: str = "magnitude", config: SynthConfig | None = None
) -> ApproxSolution:
    """Approximate an arbitrary SU(2) matrix.

    ``method="magnitude"`` approximates the X factor up to phases and
    corrects the phases with two diagonal approximations;
    ``method="euler"`` is the three-diagonal baseline (X factor through
    Hadamard conjugation).
    """
    cfg = config or DEFAULT_CONFIG
    g = get_gate_set(gs)
    _check_eps(eps)
    phi1, theta, phi2 = euler_angles(U)
    target = {"matrix": [[complex(x).real, complex(x).imag] for x in np.asarray(U, dtype=complex).ravel()]}
    if mixed:
        return _approx_general_mixed(g, U, phi1, theta, phi2, eps, cfg, target)
    if method == "euler":
        if "H" not in order_data(g).cliffords:
            raise ValueError("the Euler baseline needs a Hadamard gate")
        parts = {
            "left": approx_diagonal(g, phi1, eps / 3, cfg),
            "middle": approx_diagonal(g, theta, eps / 3, cfg),
            "right": approx_diagonal(g, phi2, eps / 3, cfg),
        }
        seq = _concat(g, [parts["left"].sequence, ["H"], parts["middle"].sequence, ["H"], parts["right"].sequence])
        bound = sum(p.certified_eps for p in parts.values())
        protocol = "general-su2-euler"
    elif method == "magnitude":
        e0, e1, e2 = cfg.general_split
        mag = approx_magnitude(g, theta, eps * e0, cfg)
        assert mag.phases is not None
        a, b = mag.phases
        parts = {
            "left": approx_diagonal(g, phi1 - a, eps * e1, cfg),
            "middle": mag,
            "right": approx_diagonal(g, phi2 - b, eps * e2, cfg),
        }
        seq = _concat(g, [parts["left"].sequence, mag.sequence, parts["right"].sequence])
        bound = sum(p.certified_eps for p in parts.values())
        protocol = "general-su2"
    else:
        raise ValueError(f"unknown method {method!r}")
    W = sequence_unitary(seq)
    direct = diamond_unitary_unitary(np.asarray(U, dtype=complex), W)
    cert = min(bound, direct) if direct <= eps else bound
    cost = _cost_of(seq)
    u, v, _ = _entries(g, seq)
    return ApproxSolution(
        protocol, g.name, target, eps, float(cert),
        [Branch(seq, 1.0, "primary", complex(u), complex(v))],
        seq.det_power, cost, dict(cost), components=parts,
    )


def _approx_general_mixed(
    g: GateSetDescriptor, U, phi1: float, theta: float, phi2: float, eps: float, cfg: SynthConfig, target: dict
) -> ApproxSolution:
    third = eps / 3
    mm = approx_mixed_magnitude(g, theta, third, cfg)
    can_twirl = "S" in order_data(g).cliffords
    correct = approx_mixed_diagonal if can_twirl else approx_diagonal
    phase_list = mm.target.get("branch_phases") or [mm.phases]
    branches: list[Branch] = []
    weighted_expected = []
    worst = []
    bound = mm.certified_eps
    components: dict[str, ApproxSolution] = {"magnitude": mm}
    for k, (br, (a, b)) in enumerate(zip(mm.branches, phase_list)):
        left = correct(g, phi1 - a, third, cfg)
        right = correct(g, phi2 - b, third, cfg)
        components[f"left{k}"] = left
        components[f"right{k}"] = right
        bound += br.weight * (left.certified_eps + right.certified_eps)
        for lb in left.branches:
            for rb in right.branches:
                seq = _concat(g, [lb.sequence, br.sequence, rb.sequence])
                u, v, _ = _entries(g, seq)
                branches.append(Branch(seq, br.weight * lb.weight * rb.weight, f"branch{k}", complex(u), complex(v)))
        mid = _cost_of(br.sequence)
        weighted_expected.append((br.weight, _add_cost(_add_cost(left.expected_cost, mid), right.expected_cost)))
        worst.append(_add_cost(_add_cost(left.cost, mid), right.cost))
    return ApproxSolution(
        "mixed-general-su2", g.name, target, eps, float(bound), branches,
        max(b.sequence.det_power for b in branches), _max_cost(worst), _combine(weighted_expected),
        p=mm.p, components=components,
    )
