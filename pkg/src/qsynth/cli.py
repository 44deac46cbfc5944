"""Command-line interface: ``approx``, ``bench``, ``verify`` and ``dump-region``.

Exit codes: 0 success, 1 verification failed, 2 invalid parameters,
3 search exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .channels import diamond_diag_general, diamond_unitary_unitary, sequence_unitary
from .exactsynth import eval_sequence, parse_sequence
from .normeq import FactoringTimeout
from .regions import (
    RegionParameterError,
    diagonal_region,
    fixed_under_rotation_region,
    magnitude_interval,
    mixed_diagonal_regions,
    mixed_magnitude_intervals,
    mixed_projective_regions,
    projective_region,
)
from .rings import get_gate_set
from .synth import (
    ApproxSolution,
    SearchExhausted,
    SynthConfig,
    approx_diagonal,
    approx_fallback,
    approx_general_su2,
    approx_magnitude,
    approx_mixed_diagonal,
    approx_mixed_fallback,
    approx_mixed_magnitude,
)

log = logging.getLogger("qsynth")

EXIT_OK, EXIT_FAIL, EXIT_PARAM, EXIT_EXHAUSTED = 0, 1, 2, 3

CSV_FIELDS = ["angle", "eps", "protocol", "gateset", "metric", "cost", "expected_cost", "certified_eps", "q_achieved", "p", "N"]
PROTOCOLS = ("diagonal", "fallback", "mixed-diagonal", "mixed-fallback", "magnitude", "mixed-magnitude", "general-su2", "mixed-general-su2")
METRICS = {"power": "power", "gate-count": "gate_count", "t-count": "t_count"}
DEFAULT_EPS_GRID = tuple(10.0**-k for k in range(4, 11))

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$", re.IGNORECASE)


class ParameterError(ValueError):
    """Invalid command-line parameter (exit code 2)."""


def parse_angle(text: str) -> float:
    """Decimal radians or ``[-][k]pi[/m]`` tokens such as ``pi/4`` and ``-3pi/8``."""
    m = _ANGLE.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise ParameterError(f"zero denominator in angle {text!r}")
        return sign * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ParameterError(f"cannot parse angle {text!r}") from None


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParameterError(f"not a number: {text!r}") from None
    return v


def _euler_unitary(phi1: float, theta: float, phi2: float) -> np.ndarray:
    rz = lambda a: np.diag([np.exp(1j * a), np.exp(-1j * a)])  # noqa: E731
    rx = np.array([[math.cos(theta), 1j * math.sin(theta)], [1j * math.sin(theta), math.cos(theta)]])
    return rz(phi1) @ rx @ rz(phi2)


def run_protocol(
    gates: str,
    protocol: str,
    eps: float,
    theta: float | None = None,
    q: float | None = None,
    unitary: np.ndarray | None = None,
    config: SynthConfig | None = None,
) -> ApproxSolution:
    """Dispatch one approximation by protocol name."""
    if protocol not in PROTOCOLS:
        raise ParameterError(f"unknown protocol {protocol!r}")
    if protocol in ("general-su2", "mixed-general-su2"):
        if unitary is None:
            if theta is None:
                raise ParameterError("general-su2 needs --euler or --theta")
            unitary = _euler_unitary(0.0, theta, 0.0)
        return approx_general_su2(gates, unitary, eps, mixed=protocol.startswith("mixed"), config=config)
    if theta is None:
        raise ParameterError("--theta is required")
    if protocol in ("fallback", "mixed-fallback"):
        if q is None:
            raise ParameterError("--q is required for fallback protocols")
        fn = approx_fallback if protocol == "fallback" else approx_mixed_fallback
        return fn(gates, theta, eps, q, config)
    fn = {
        "diagonal": approx_diagonal,
        "mixed-diagonal": approx_mixed_diagonal,
        "magnitude": approx_magnitude,
        "mixed-magnitude": approx_mixed_magnitude,
    }[protocol]
    return fn(gates, theta, eps, config)


def solution_row(sol: ApproxSolution, angle: float, metric: str) -> dict:
    key = METRICS[metric]
    return {
        "angle": angle,
        "eps": sol.eps,
        "protocol": sol.protocol,
        "gateset": sol.gate_set,
        "metric": metric,
        "cost": sol.cost[key],
        "expected_cost": sol.expected_cost[key],
        "certified_eps": sol.certified_eps,
        "q_achieved": "" if sol.q_achieved is None else sol.q_achieved,
        "p": "" if sol.p is None else sol.p,
        "N": sol.N,
    }


def _write_csv(rows: Sequence[dict], out) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in CSV_FIELDS})


def _solution_text(sol: ApproxSolution) -> str:
    lines = [
        f"protocol       {sol.protocol}",
        f"gate set       {sol.gate_set}",
        f"eps            {sol.eps:g}",
        f"certified eps  {sol.certified_eps:.6g}",
        f"N              {sol.N}",
        f"cost           " + ", ".join(f"{k}={v:g}" for k, v in sol.cost.items()),
        f"expected cost  " + ", ".join(f"{k}={v:.4g}" for k, v in sol.expected_cost.items()),
    ]
    if sol.p is not None:
        lines.append(f"p              {sol.p:.6g}")
    if sol.q_achieved is not None:
        lines.append(f"q achieved     {sol.q_achieved:.6g}")
    if sol.phases is not None:
        lines.append(f"phases         {sol.phases[0]:.12g} {sol.phases[1]:.12g}")
    for b in sol.branches:
        lines.append(f"[{b.role} w={b.weight:.6g}] {b.sequence}")
    for k, fb in enumerate(sol.fallbacks):
        if fb is not None:
            for b in fb.branches:
                lines.append(f"[fallback{k} w={b.weight:.6g}] {b.sequence}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# approx
# ---------------------------------------------------------------------------


def cmd_approximate(args: argparse.Namespace, out) -> int:
    theta = parse_angle(args.theta) if args.theta is not None else None
    unitary = None
    if args.euler:
        parts = [parse_angle(x) for x in args.euler.split(",")]
        if len(parts) != 3:
            raise ParameterError("--euler takes phi1,theta,phi2")
        unitary = _euler_unitary(*parts)
    if args.dump_region:
        if theta is None:
            raise ParameterError("--dump-region needs --theta")
        with open(args.dump_region, "w") as fh:
            json.dump(_region_json(args.protocol, theta, args.eps, args.q), fh, indent=2)
    sol = run_protocol(args.gates, args.protocol, args.eps, theta, args.q, unitary)
    if args.format == "json":
        json.dump(sol.to_dict(), out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        _write_csv([solution_row(sol, theta if theta is not None else float("nan"), args.metric)], out)
    else:
        out.write(_solution_text(sol) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------


@dataclass
class BenchConfig:
    """Benchmark sweep over angles and accuracies."""

    gates: str = "clifford-t"
    protocol: str = "diagonal"
    count: int = 50
    seed: int = 0
    fourier: tuple[int, int] | None = None
    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    q: float = 0.99
    metric: str = "t-count"
    output: str | None = None
    jobs: int = 1
    fit_below: float = 1e-4

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ParameterError("angle count must be at least 1")
        if any(b >= a for a, b in zip(self.eps_grid, self.eps_grid[1:])):
            raise ParameterError("eps grid must be strictly decreasing")
        if not self.eps_grid or any(not 0 < e <= 2 for e in self.eps_grid):
            raise ParameterError("eps values must lie in (0, 2]")
        if self.metric not in METRICS:
            raise ParameterError(f"metric must be one of {sorted(METRICS)}")
        if self.protocol not in PROTOCOLS[:6]:
            raise ParameterError(f"bench supports {', '.join(PROTOCOLS[:6])}")

    def angles(self) -> list[float]:
        if self.fourier is not None:
            lo, hi = self.fourier
            return [math.pi / 2**n for n in range(lo, hi + 1)]
        rng = np.random.default_rng(self.seed)
        return [float(x) for x in rng.uniform(0.0, 2 * math.pi, self.count)]


def _bench_one(task: tuple[str, str, float, float, float, str]) -> dict:
    gates, protocol, angle, eps, q, metric = task
    try:
        sol = run_protocol(gates, protocol, eps, angle, q)
    except (SearchExhausted, FactoringTimeout, ValueError) as exc:
        return {"angle": angle, "eps": eps, "protocol": protocol, "gateset": gates, "metric": metric, "error": str(exc)}
    return solution_row(sol, angle, metric)


def linear_fit(rows: Sequence[dict], below: float = 1e-4) -> dict:
    """Least-squares ``cost = alpha log2(1/eps) + beta`` over per-eps mean and max of ``expected_cost``."""
    by_eps: dict[float, list[float]] = {}
    for r in rows:
        if "error" in r or not r["eps"] < below:
            continue
        by_eps.setdefault(float(r["eps"]), []).append(float(r["expected_cost"]))
    if len(by_eps) < 2:
        return {}
    xs = np.array([math.log2(1 / e) for e in sorted(by_eps)])
    out = {}
    for name, agg in (("mean", np.mean), ("max", np.max)):
        ys = np.array([agg(by_eps[e]) for e in sorted(by_eps)])
        alpha, beta = np.polyfit(xs, ys, 1)
        out[name] = {"slope": float(alpha), "intercept": float(beta)}
    out["points"] = len(by_eps)
    return out


def run_bench(cfg: BenchConfig) -> tuple[list[dict], dict]:
    tasks = [(cfg.gates, cfg.protocol, a, e, cfg.q, cfg.metric) for a in cfg.angles() for e in cfg.eps_grid]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_bench_one, tasks, chunksize=4))
    else:
        rows = [_bench_one(t) for t in tasks]
    for r in rows:
        if "error" in r:
            log.warning("angle=%s eps=%s failed: %s", r["angle"], r["eps"], r["error"])
    rows.sort(key=lambda r: (r["angle"], -r["eps"]))
    return rows, linear_fit(rows, cfg.fit_below)


def cmd_bench(args: argparse.Namespace, out) -> int:
    fourier = None
    if args.fourier:
        lo, _, hi = args.fourier.partition(":")
        fourier = (int(lo), int(hi or lo))
    grid = tuple(float(x) for x in args.eps.split(",")) if args.eps else DEFAULT_EPS_GRID
    cfg = BenchConfig(
        gates=args.gates,
        protocol=args.protocol,
        count=args.angles,
        seed=args.seed,
        fourier=fourier,
        eps_grid=grid,
        q=args.q if args.q is not None else 0.99,
        metric=args.metric,
        output=args.output,
        jobs=args.jobs,
    )
    rows, fit = run_bench(cfg)
    good = [r for r in rows if "error" not in r]
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            _write_csv(good, fh)
    if args.format == "json":
        json.dump({"config": asdict(cfg), "rows": rows, "fit": fit}, out, indent=2)
        out.write("\n")
    elif args.format == "csv":
        _write_csv(good, out)
    else:
        out.write(f"{len(good)}/{len(rows)} rows solved\n")
        for name in ("mean", "max"):
            if name in fit:
                out.write(f"{name:4s} fit: {fit[name]['slope']:.3f} log2(1/eps) {fit[name]['intercept']:+.2f}\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace, out) -> int:
    with open(args.sequence_file) as fh:
        text = fh.read()
    gs = get_gate_set(args.gates)
    try:
        seq = parse_sequence(text, gs.name)
    except (KeyError, ValueError) as exc:
        raise ParameterError(f"cannot parse sequence: {exc}") from None
    qm = eval_sequence(seq)
    U = sequence_unitary(seq)
    if args.euler:
        target = _euler_unitary(*[parse_angle(x) for x in args.euler.split(",")])
        dist = diamond_unitary_unitary(target, U)
    elif args.theta is not None:
        dist = float(diamond_diag_general(parse_angle(args.theta), complex(U[0, 0])))
    else:
        raise ParameterError("verify needs --theta or --euler")
    ok = dist <= args.eps
    report = {
        "sequence": str(seq),
        "det_power": seq.det_power,
        "cost": seq.cost,
        "matrix": {"coords": list(qm.coords)},
        "unitary": [[complex(x).real, complex(x).imag] for x in U.ravel()],
        "distance": dist,
        "eps": args.eps,
        "pass": ok,
    }
    if args.format == "json":
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        out.write(f"{'PASS' if ok else 'FAIL'} distance={dist:.6g} eps={args.eps:g} cost={seq.cost}\n")
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# dump-region
# ---------------------------------------------------------------------------


def _region_json(kind: str, theta: float, eps: float, q: float | None, x1: float | None = None, y1: float | None = None) -> dict:
    if kind == "diagonal":
        return diagonal_region(theta, eps).to_json()
    if kind == "fallback":
        return projective_region(theta, eps / 2, _need_q(q)).to_json()
    if kind == "mixed-diagonal":
        under, over = mixed_diagonal_regions(theta, eps)
        return {"under": under.to_json(), "over": over.to_json()}
    if kind == "mixed-fallback":
        under, over = mixed_projective_regions(theta, eps / 2, _need_q(q))
        return {"under": under.to_json(), "over": over.to_json()}
    if kind == "magnitude":
        return magnitude_interval(theta, eps).to_json()
    if kind == "mixed-magnitude":
        under, over = mixed_magnitude_intervals(theta, eps)
        return {"under": under.to_json(), "over": over.to_json()}
    if kind in ("fixed-under-unitary", "fixed-under-fallback"):
        if x1 is None or y1 is None:
            raise ParameterError("fixed-under regions need --x1 and --y1")
        return fixed_under_rotation_region(theta, eps, x1, y1, kind=kind.rsplit("-", 1)[1], q=q).to_json()
    raise ParameterError(f"no region for {kind!r}")


def _need_q(q: float | None) -> float:
    if q is None:
        raise ParameterError("--q is required")
    return q


def cmd_dump_region(args: argparse.Namespace, out) -> int:
    data = _region_json(args.kind, parse_angle(args.theta), args.eps, args.q, args.x1, args.y1)
    json.dump(data, out, indent=2)
    out.write("\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsynth", description="Optimal single-qubit rotation synthesis.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--gates", default="clifford-t", help="v, clifford-t or clifford-sqrt-t")
        p.add_argument("--format", choices=("json", "csv", "text"), default="text")

    p = sub.add_parser("approx", help="approximate one rotation or unitary")
    common(p)
    p.add_argument("--protocol", choices=PROTOCOLS, default="diagonal")
    p.add_argument("--theta", help="angle in radians or a pi/k token")
    p.add_argument("--euler", help="phi1,theta,phi2 of e^{i phi1 Z} e^{i theta X} e^{i phi2 Z}")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--q", type=_positive_float)
    p.add_argument("--metric", choices=tuple(METRICS), default="t-count")
    p.add_argument("--dump-region", metavar="PATH", help="also write the search region as JSON")
    p.set_defaults(handler=cmd_approximate)

    p = sub.add_parser("bench", help="cost-scaling sweep with a linear fit")
    common(p)
    p.add_argument("--protocol", choices=PROTOCOLS[:6], default="diagonal")
    p.add_argument("--angles", type=int, default=50, help="number of uniformly random angles")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fourier", help="n range lo:hi for angles pi/2^n")
    p.add_argument("--eps", help="comma-separated strictly decreasing accuracies")
    p.add_argument("--q", type=_positive_float)
    p.add_argument("--metric", choices=tuple(METRICS), default="t-count")
    p.add_argument("--output", help="CSV output path")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("verify", help="check a gate sequence against a target")
    common(p)
    p.add_argument("sequence_file")
    p.add_argument("--theta")
    p.add_argument("--euler")
    p.add_argument("--eps", type=_positive_float, required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("dump-region", help="print a search region as JSON")
    p.add_argument(
        "--kind",
        choices=PROTOCOLS[:6] + ("fixed-under-unitary", "fixed-under-fallback"),
        default="diagonal",
    )
    p.add_argument("--theta", required=True)
    p.add_argument("--eps", type=_positive_float, required=True)
    p.add_argument("--q", type=_positive_float)
    p.add_argument("--x1", type=float)
    p.add_argument("--y1", type=float)
    p.set_defaults(handler=cmd_dump_region)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARAM if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.handler(args, out)
    except (SearchExhausted, FactoringTimeout) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (ParameterError, RegionParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
