"""Sweeps over the shooting value alpha and behavioural threshold search."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .diagnostics import OSCILLATORY, Verdict, classify, compute_monitors, fit_decay_exponent
from .errors import HelmholtzLabError, MonotonicityFail, NoBracket
from .nonlinearity import NonlinearitySpec, compute_alpha0, spec_to_dict
from .radial_ivp import SolveConfig, first_zero, integrate


@dataclass
class SweepRow:
    alpha: float
    verdict: str
    first_zero: float | None
    zero_count: int
    sup_u: float
    sup_du: float
    decay_exponent: float | None
    Z_final: float
    note: str = ""


@dataclass
class SweepResult:
    rows: list[SweepRow]
    spec_digest: str
    max_first_zero_slope: float | None = None

    def verdicts(self) -> list[str]:
        return [row.verdict for row in self.rows]


def run_digest(spec: NonlinearitySpec, N: int, cfg: SolveConfig) -> str:
    blob = json.dumps({"spec": spec_to_dict(spec), "N": N, "config": asdict(cfg)},
                      sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_alphas(spec: NonlinearitySpec, n: int = 33) -> np.ndarray:
    """n values log-spaced in (0, alpha_0); alpha_0 = inf uses (0, 1)."""
    a0 = compute_alpha0(spec, 0.0)
    top = a0 if math.isfinite(a0) else 1.0
    return top * np.geomspace(1e-3, 0.99, n)


def _row(args) -> SweepRow:
    spec, cfg, r_lo = args
    alpha = cfg.alpha
    try:
        traj = integrate(spec, cfg)
        verdict = classify(traj)
        sup_u = float(max(np.max(np.abs(traj.u)), abs(alpha)))
        sup_du = float(np.max(np.abs(traj.du)))
        for e in traj.events:
            sup_u = max(sup_u, abs(e.u))
            sup_du = max(sup_du, abs(e.du))
        decay = None
        if verdict.verdict is Verdict.OSCILLATING_LOCALIZED:
            try:
                decay = fit_decay_exponent(traj, r_lo=r_lo).exponent
            except HelmholtzLabError:
                pass
        Z = compute_monitors(traj).Z
        return SweepRow(alpha, verdict.verdict.value, first_zero(traj), verdict.zero_count,
                        sup_u, sup_du, decay, float(Z[-1]), "; ".join(verdict.notes))
    except HelmholtzLabError as exc:
        return SweepRow(alpha, Verdict.UNDETERMINED.value, None, 0, math.nan, math.nan,
                        None, math.nan, f"{type(exc).__name__}: {exc}")


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def sweep_alpha(spec: NonlinearitySpec, N: int, alphas, cfg: SolveConfig | None = None,
                r_lo: float = 20.0, workers: int = 1) -> SweepResult:
    """One solve and classification per alpha; a failing row never aborts the sweep."""
    cfg = (cfg or SolveConfig()).with_(N=N)
    alphas = sorted(float(a) for a in alphas)
    jobs = [(spec, cfg.with_(alpha=a), r_lo) for a in alphas]
    rows = _map(_row, jobs, workers)
    slopes = []
    for a, b in zip(rows, rows[1:]):
        if (a.verdict in (v.value for v in OSCILLATORY) and a.verdict == b.verdict
                and a.first_zero is not None and b.first_zero is not None):
            slopes.append(abs(b.first_zero - a.first_zero) / (b.alpha - a.alpha))
    return SweepResult(rows, run_digest(spec, N, cfg), max(slopes) if slopes else None)


def write_sweep_csv(result: SweepResult, path) -> None:
    names = ["alpha", "verdict", "first_zero", "zero_count", "sup_u", "sup_du",
             "decay_exponent", "Z_final"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in result.rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                        for v in (getattr(row, n) for n in names)])


@dataclass
class ThresholdBracket:
    lo: float
    hi: float
    alpha0: float | None
    agrees: bool | None
    solves: int = 0

    @property
    def width(self) -> float:
        return self.hi - self.lo


def _side(spec, cfg, alpha) -> str:
    verdict = classify(integrate(spec, cfg.with_(alpha=alpha))).verdict
    if verdict is Verdict.BLOWUP:
        return "above"
    if verdict is Verdict.CONSTANT_ALPHA0:
        return "at"
    if verdict in OSCILLATORY:
        return "below"
    raise NoBracket(f"alpha={alpha:.12g} classified {verdict.value}; cannot place it")


def bracket_threshold(spec: NonlinearitySpec, N: int, cfg: SolveConfig | None = None,
                      width: float = 1e-6, start: float = 1.0, cap: float = 64.0,
                      agree_tol: float = 1e-5) -> ThresholdBracket:
    """Bisect on the OscillatingLocalized / Blowup boundary in alpha."""
    cfg = (cfg or SolveConfig()).with_(N=N)
    solves = 0
    lo, hi = None, None
    a = start
    while a <= cap:
        side = _side(spec, cfg, a)
        solves += 1
        if side == "at":
            lo = hi = a
            break
        if side == "above":
            hi = a
            break
        lo = a
        a *= 2.0
    if hi is None:
        raise NoBracket(f"no blow-up found for alpha up to {cap:g}")
    if lo is None:
        a = hi
        while lo is None:
            a *= 0.5
            if a < 1e-8:
                raise NoBracket("no oscillatory value found below the first blow-up")
            side = _side(spec, cfg, a)
            solves += 1
            if side == "above":
                hi = a
            elif side == "at":
                lo = hi = a
            else:
                lo = a
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        side = _side(spec, cfg, mid)
        solves += 1
        if side == "at":
            lo = hi = mid
        elif side == "above":
            hi = mid
        else:
            lo = mid
    alpha0, agrees = None, None
    if spec.autonomous:
        try:
            alpha0 = compute_alpha0(spec, 0.0)
        except HelmholtzLabError:
            alpha0 = None
        if alpha0 is not None and math.isfinite(alpha0):
            agrees = abs(0.5 * (lo + hi) - alpha0) <= agree_tol and lo <= alpha0 <= hi
    return ThresholdBracket(lo, hi, alpha0, agrees, solves)


@dataclass
class FirstZeroReport:
    alphas: list[float]
    first_zeros: list[float | None]
    precondition: bool
    strictly_increasing: bool
    notes: list[str] = field(default_factory=list)


def ratio_decreasing(spec: NonlinearitySpec, upper: float, samples: int = 512) -> bool:
    """Whether z -> g(0, z)/z is strictly decreasing on (0, upper)."""
    top = upper if math.isfinite(upper) else 10.0
    z = np.linspace(0.0, top, samples + 2)[1:-1]
    ratio = spec.g(0.0, z) / z
    return bool(np.all(np.diff(ratio) < 0))


def first_zero_monotonicity(spec: NonlinearitySpec, N: int, alphas,
                            cfg: SolveConfig | None = None) -> FirstZeroReport:
    """First zeros r_1(alpha) along an increasing list of alphas.

    Raises :class:`MonotonicityFail` when g(z)/z is decreasing but r_1 is not
    strictly increasing.
    """
    cfg = (cfg or SolveConfig()).with_(N=N)
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly increasing")
    a0 = compute_alpha0(spec, 0.0)
    pre = ratio_decreasing(spec, a0)
    zeros = [first_zero(integrate(spec, cfg.with_(alpha=a))) for a in alphas]
    notes = []
    if not pre:
        notes.append("g(z)/z is not strictly decreasing; no ordering is implied")
    increasing = all(z is not None for z in zeros) and all(b > a for a, b in zip(zeros, zeros[1:]))
    if pre and not increasing:
        for (a1, z1), (a2, z2) in zip(zip(alphas, zeros), zip(alphas[1:], zeros[1:])):
            if z1 is None or z2 is None or not z2 > z1:
                raise MonotonicityFail(f"r1({a1:g})={z1} is not below r1({a2:g})={z2}",
                                       pair=(a1, a2))
    return FirstZeroReport(alphas, zeros, pre, increasing, notes)
