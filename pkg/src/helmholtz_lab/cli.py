"""Command-line entry point: ``helmholtz-lab <subcommand> <spec> [options]``.

Every subcommand writes one JSON run summary (stdout or ``--out``) and
optionally CSV tables.  Exit codes: 0 pass, 1 check failure, 2 usage or
spec error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from . import continuum, diagnostics, domain_approx, nonlinearity, radial_ivp
from .errors import HelmholtzLabError, HypothesesFail, InvalidSpec, NoBracket

SCHEMA = "helmholtz-lab/run-summary"
SCHEMA_VERSION = 1
SEED = 0

SPEC_HELP = """\
spec file (JSON):
  {"family": "<name>", "parameters": {<name>: <number or coefficient block>, ...}}
  families: saturable (lam, s), defocusing_power (k, Q, p), focusing_power (k, Q, p),
            concave_convex (lam, mu, q, p), linear_helmholtz (k), pure_damping ()
  aliases:  g1, g2, g3, g4, linear, damping
  coefficient block: {"family": "constant" | "exp_approach" | "rational_approach",
                      "c_inf": x, "a": x, "b_or_gamma": x}
  A bare catalog name (e.g. "g2") may be given instead of a file path.
"""


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        return "0.1.0"


# -- JSON encoding ---------------------------------------------------------

_NONFINITE = {"NaN": math.nan, "Infinity": math.inf, "-Infinity": -math.inf}


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become the strings NaN/Infinity/-Infinity."""
    if isinstance(obj, Enum):
        return obj.value
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    return obj


def from_jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(v) for v in obj]
    if isinstance(obj, str) and obj in _NONFINITE:
        return _NONFINITE[obj]
    return obj


@dataclass
class RunSummary:
    command: str
    spec: dict
    config: dict
    passed: bool
    verdicts: list = field(default_factory=list)
    events: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    decay: dict | None = None
    results: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    seed: int = SEED
    version: str = field(default_factory=tool_version)
    schema: str = SCHEMA
    schema_version: int = SCHEMA_VERSION
    timing: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return to_jsonable(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        data = from_jsonable(data)
        if data.get("schema") != SCHEMA:
            raise InvalidSpec(f"not a run summary document (schema={data.get('schema')!r})")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunSummary":
        return cls.from_dict(json.loads(text))

    def canonical(self) -> dict:
        """The summary with timing removed, for comparisons across runs."""
        out = self.to_dict()
        out.pop("timing", None)
        return out


# -- helpers ---------------------------------------------------------------

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def worker_count() -> int:
    raw = os.environ.get("HELMHOLTZ_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"HELMHOLTZ_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("HELMHOLTZ_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def load_spec(source: str) -> nonlinearity.NonlinearitySpec:
    path = Path(source)
    if path.exists():
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InvalidSpec(f"{source}: not valid JSON ({exc})") from None
        return nonlinearity.spec_from_dict(data)
    if source in nonlinearity.FAMILY_ALIASES or source in {f.value for f in nonlinearity.Family}:
        return nonlinearity.spec_from_dict({"family": source})
    raise InvalidSpec(f"{source}: no such spec file or catalog name")


def require_valid(spec) -> nonlinearity.HypothesisReport:
    """Reject specs outside the existence theory before any solve."""
    report = nonlinearity.validate_spec(spec, seed=SEED)
    if not report.passed:
        raise InvalidSpec("spec fails the structural hypotheses: " + "; ".join(report.notes))
    return report


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _flatten(values) -> list[float]:
    out = []
    for v in values or []:
        out.extend(v)
    return out


def _solve_config(args) -> radial_ivp.SolveConfig:
    return radial_ivp.SolveConfig(N=args.N, alpha=args.alpha, r_max=args.rmax,
                                  rtol=args.rtol, atol=args.atol)


def _events(traj) -> list[dict]:
    return [{"kind": e.kind, "r": e.r, "u": e.u, "du": e.du} for e in traj.events]


# -- subcommands -----------------------------------------------------------

def cmd_validate(args, spec) -> RunSummary:
    report = nonlinearity.validate_spec(spec, seed=SEED)
    results = {"hypotheses": report}
    if report.positive_slope_at_zero:
        try:
            results["admissible_interval"] = list(nonlinearity.admissible_interval(spec))
        except HelmholtzLabError as exc:
            results["admissible_interval_error"] = str(exc)
    if args.echo:
        Path(args.echo).write_text(json.dumps(nonlinearity.spec_to_dict(spec), indent=2,
                                              sort_keys=True) + "\n")
    return RunSummary("validate", nonlinearity.spec_to_dict(spec), {"seed": SEED},
                      report.passed, checks={"hypotheses_passed": report.passed},
                      results=to_jsonable(results))


def cmd_solve(args, spec) -> RunSummary:
    require_valid(spec)
    cfg = _solve_config(args)
    traj = radial_ivp.integrate(spec, cfg)
    cls = diagnostics.classify(traj)
    checks: dict[str, Any] = {}
    zc = diagnostics.check_Z_monotone(diagnostics.compute_monitors(traj))
    checks["Z"] = zc
    passed = zc.passed and cls.verdict is not diagnostics.Verdict.UNDETERMINED
    if cls.verdict in diagnostics.OSCILLATORY and len(traj.events) >= 3:
        chain = diagnostics.check_oscillation_chain(traj)
        checks["chain"] = {k: v for k, v in asdict(chain).items() if k != "chain"}
        passed = passed and chain.passed
    if args.csv:
        radial_ivp.write_trajectory_csv(traj, args.csv)
    if args.events:
        radial_ivp.write_events_csv(traj, args.events)
    return RunSummary("solve", nonlinearity.spec_to_dict(spec), asdict(cfg), passed,
                      verdicts=[to_jsonable(cls)], events=_events(traj),
                      checks=to_jsonable(checks),
                      results={"terminated_by": traj.terminated_by.value,
                               "r_end": traj.r_end, "first_zero": radial_ivp.first_zero(traj)})


def cmd_decay(args, spec) -> RunSummary:
    require_valid(spec)
    cfg = _solve_config(args)
    traj = radial_ivp.integrate(spec, cfg)
    cls = diagnostics.classify(traj)
    r_lo = args.r_lo if args.r_lo is not None else max(20.0, cfg.r_max / 20.0)
    fit = diagnostics.fit_decay_exponent(traj, r_lo=r_lo)
    psi = diagnostics.check_psi_bounded(diagnostics.compute_monitors(traj), r_lo)
    exponent_ok = abs(fit.exponent - fit.theory) <= args.exponent_tol
    passed = exponent_ok and psi.passed and cls.verdict is diagnostics.Verdict.OSCILLATING_LOCALIZED
    return RunSummary("decay", nonlinearity.spec_to_dict(spec), asdict(cfg), passed,
                      verdicts=[to_jsonable(cls)], decay=to_jsonable(fit),
                      checks=to_jsonable({"exponent_ok": exponent_ok,
                                          "exponent_tol": args.exponent_tol, "psi": psi}))


def cmd_sweep(args, spec) -> RunSummary:
    require_valid(spec)
    cfg = radial_ivp.SolveConfig(N=args.N, r_max=args.rmax, rtol=args.rtol, atol=args.atol)
    alphas = _flatten(args.alphas) or list(continuum.default_alphas(spec))
    for a in alphas:
        if not math.isfinite(a):
            raise InvalidSpec("alphas must be finite")
    result = continuum.sweep_alpha(spec, args.N, alphas, cfg, workers=worker_count())
    bad = []
    for row in result.rows:
        if row.verdict == diagnostics.Verdict.UNDETERMINED.value:
            bad.append(f"alpha={row.alpha!r}: undetermined ({row.note})")
        elif row.verdict in {v.value for v in diagnostics.OSCILLATORY}:
            bound = math.sqrt(2.0 * float(spec.G(0.0, row.alpha)))
            if abs(row.sup_u - abs(row.alpha)) > 1e-8 or row.sup_du > bound + 1e-8:
                bad.append(f"alpha={row.alpha!r}: sup bounds violated")
    if args.csv:
        continuum.write_sweep_csv(result, args.csv)
    return RunSummary("sweep", nonlinearity.spec_to_dict(spec), asdict(cfg), not bad,
                      verdicts=result.verdicts(),
                      checks={"row_failures": bad,
                              "max_first_zero_slope": result.max_first_zero_slope},
                      results={"spec_digest": result.spec_digest,
                               "rows": to_jsonable(result.rows)})


def cmd_threshold(args, spec) -> RunSummary:
    require_valid(spec)
    cfg = radial_ivp.SolveConfig(N=args.N, r_max=args.rmax, rtol=args.rtol, atol=args.atol)
    try:
        br = continuum.bracket_threshold(spec, args.N, cfg, width=args.width)
    except NoBracket as exc:
        return RunSummary("threshold", nonlinearity.spec_to_dict(spec), asdict(cfg), False,
                          errors=[f"NoBracket: {exc}"])
    passed = br.agrees is not False
    return RunSummary("threshold", nonlinearity.spec_to_dict(spec), asdict(cfg), passed,
                      checks={"agrees_with_closed_form": br.agrees},
                      results={"alpha_lo": br.lo, "alpha_hi": br.hi, "width": br.width,
                               "alpha0": br.alpha0, "solves": br.solves})


def cmd_domain(args, spec) -> RunSummary:
    require_valid(spec)
    if not spec.autonomous:
        raise InvalidSpec("domain study needs an autonomous spec")
    radii = _flatten(args.radii)
    if not radii:
        raise UsageError("domain: --radii is required")
    study = domain_approx.domain_limit_study(spec, args.N, radii, m_per_R=args.mesh_density,
                                             workers=worker_count())
    if args.csv:
        domain_approx.write_table_csv(study, args.csv)
    config = {"N": args.N, "radii": radii, "mesh_density": args.mesh_density}
    return RunSummary("domain", nonlinearity.spec_to_dict(spec), config, study.passed,
                      checks={"u_center_increasing": study.u_center_increasing,
                              "energy_decreasing_negative": study.energy_decreasing_negative,
                              "norms_increasing": study.norms_increasing,
                              "all_converged": all(r.converged for r in study.rows)},
                      results={"rows": to_jsonable(study.rows)})


COMMANDS = {
    "validate": cmd_validate, "solve": cmd_solve, "sweep": cmd_sweep,
    "decay": cmd_decay, "threshold": cmd_threshold, "domain": cmd_domain,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="helmholtz-lab", description=__doc__.splitlines()[0],
                     epilog=SPEC_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, solver=True):
        p.add_argument("spec", help="spec JSON file or catalog name")
        p.add_argument("--out", help="write the run summary here instead of stdout")
        if solver:
            p.add_argument("--N", type=int, required=True, help="space dimension")
            p.add_argument("--rmax", type=float, default=200.0)
            p.add_argument("--rtol", type=float, default=1e-10)
            p.add_argument("--atol", type=float, default=1e-12)
        return p

    p = common(sub.add_parser("validate", help="check the structural hypotheses", epilog=SPEC_HELP,
                              formatter_class=argparse.RawDescriptionHelpFormatter), solver=False)
    p.add_argument("--echo", metavar="PATH", help="write the normalized spec file here")

    p = common(sub.add_parser("solve", help="integrate one radial solution"))
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--csv", metavar="PATH", help="trajectory CSV (r,u,du)")
    p.add_argument("--events", metavar="PATH", help="event CSV (kind,r,u)")

    p = common(sub.add_parser("sweep", help="classify a range of shooting values"))
    p.add_argument("--alphas", type=_float_list, nargs="+",
                   help="alpha values (default: 33 log-spaced in (0, alpha0))")
    p.add_argument("--csv", metavar="PATH", help="one row per alpha")

    p = common(sub.add_parser("decay", help="fit the decay exponent at infinity"))
    p.set_defaults(rmax=1000.0)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--r-lo", type=float, default=None, help="start of the fit window")
    p.add_argument("--exponent-tol", type=float, default=0.05)

    p = common(sub.add_parser("threshold", help="bracket the blow-up threshold alpha0"))
    p.add_argument("--width", type=float, default=1e-6)

    p = common(sub.add_parser("domain", help="energy minimizers on growing balls"), solver=False)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--radii", type=_float_list, nargs="+", required=True)
    p.add_argument("--mesh-density", type=float, default=256.0, help="nodes per unit radius")
    p.add_argument("--csv", metavar="PATH", help="table CSV")
    return parser


def run(argv: list[str] | None = None) -> int:
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        print(SPEC_HELP, file=sys.stderr, end="")
        return 2
    try:
        spec = load_spec(args.spec)
        summary = COMMANDS[args.command](args, spec)
        code = 0 if summary.passed else 1
    except (UsageError, InvalidSpec, HypothesesFail) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except HelmholtzLabError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        summary = RunSummary(args.command, {"source": args.spec}, {}, False,
                             errors=[f"{type(exc).__name__}: {exc}"])
        code = 1
    summary.timing = {"wall_seconds": time.perf_counter() - t0}
    text = summary.to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
