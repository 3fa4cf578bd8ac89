"""Monitor functions, verdicts and asymptotic fits for computed trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InsufficientRange, NotPeriodic, TooFewEvents
from .nonlinearity import compute_alpha0
from .radial_ivp import Termination, Trajectory


class Verdict(str, Enum):
    CONSTANT_ZERO = "ConstantZero"
    CONSTANT_ALPHA0 = "ConstantAlpha0"
    OSCILLATING_LOCALIZED = "OscillatingLocalized"
    PERIODIC = "Periodic"
    BLOWUP = "Blowup"
    UNDETERMINED = "Undetermined"


OSCILLATORY = (Verdict.OSCILLATING_LOCALIZED, Verdict.PERIODIC)


@dataclass(frozen=True, eq=False)
class MonitorSeries:
    """Z(r) = u'^2 + 2G(r,u) and psi(r) = v'^2 + 2 r^(N-1) G(r,u), v = r^((N-1)/2) u."""

    r: np.ndarray
    u: np.ndarray
    Z: np.ndarray
    psi: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    N: int
    autonomous: bool


def compute_monitors(traj: Trajectory) -> MonitorSeries:
    r, u, du = traj.r, traj.u, traj.du
    N = traj.config.N
    G = traj.spec.G(r, u)
    Z = du * du + 2.0 * G
    half = 0.5 * (N - 1)
    v = r ** half * u
    dv = r ** half * du + half * r ** (half - 1.0) * u
    psi = dv * dv + 2.0 * r ** (N - 1) * G
    return MonitorSeries(r, u, Z, psi, v, dv, N, traj.spec.autonomous)


@dataclass(frozen=True)
class ZCheck:
    passed: bool
    max_violation: float
    tolerance: float
    mode: str  # "monotone" or "conserved"


def check_Z_monotone(mon: MonitorSeries) -> ZCheck:
    """Z non-increasing node to node for N >= 2, conserved for autonomous N = 1."""
    tol = 1e-8 * (1.0 + abs(mon.Z[0]))
    if mon.N == 1 and mon.autonomous:
        viol = float(np.max(np.abs(mon.Z - mon.Z[0]))) if mon.Z.size else 0.0
        return ZCheck(viol <= tol, viol, tol, "conserved")
    inc = np.diff(mon.Z)
    viol = float(max(inc.max(), 0.0)) if inc.size else 0.0
    return ZCheck(viol <= tol, viol, tol, "monotone")


@dataclass(frozen=True)
class ChainReport:
    passed: bool
    chain: np.ndarray
    min_relative_drop: float
    interleaved: bool
    sup_u: float
    sup_du: float
    du_bound: float
    sup_u_ok: bool
    sup_du_ok: bool
    n_events: int


def _sup_values(traj: Trajectory) -> tuple[float, float]:
    sup_u = float(np.max(np.abs(traj.u)))
    sup_du = float(np.max(np.abs(traj.du)))
    for e in traj.events:
        sup_u = max(sup_u, abs(e.u))
        sup_du = max(sup_du, abs(e.du))
    return max(sup_u, abs(traj.config.alpha)), sup_du


def check_oscillation_chain(traj: Trajectory, n_events: int | None = None) -> ChainReport:
    """Strict decrease of 2G(u(r0)) > u'(r1)^2 > 2G(u(r2)) > ... over the events.

    Also checks the sup bounds ``sup|u| = |alpha|`` and ``sup|u'| <= sqrt(2G(0, alpha))``.
    """
    events = traj.events if n_events is None else traj.events[:n_events]
    if len(events) < 3:
        raise TooFewEvents(f"need at least 3 events, have {len(events)}")
    spec, alpha = traj.spec, traj.config.alpha
    chain = [2.0 * float(spec.G(0.0, alpha))]
    kinds = []
    for e in events:
        if e.kind == "zero":
            chain.append(e.du * e.du)
        else:
            chain.append(2.0 * float(spec.G(e.r, e.u)))
        kinds.append(e.kind)
    chain = np.array(chain)
    drops = -np.diff(chain) / chain[:-1]
    expect_sign = 1.0 if alpha > 0 else -1.0
    interleaved = True
    for i, e in enumerate(events):
        if i % 2 == 0:
            interleaved &= e.kind == "zero"
        else:
            want = "min" if (i // 2) % 2 == 0 else "max"
            if expect_sign < 0:
                want = "max" if want == "min" else "min"
            interleaved &= e.kind == want

    sup_u, sup_du = _sup_values(traj)
    bound = math.sqrt(max(chain[0], 0.0))
    sup_u_ok = abs(sup_u - abs(alpha)) <= 1e-8
    sup_du_ok = sup_du <= bound + 1e-8
    passed = bool(np.all(drops > -1e-9)) and interleaved and sup_u_ok and sup_du_ok
    return ChainReport(passed, chain, float(drops.min()), bool(interleaved),
                       sup_u, sup_du, bound, sup_u_ok, sup_du_ok, len(events))


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    c_low: float
    C_high: float
    fit_range: tuple[float, float]
    residual: float
    n_points: int
    theory: float


def fit_decay_exponent(traj: Trajectory, r_lo: float = 20.0, r_hi: float | None = None,
                       min_points: int = 10) -> DecayFit:
    """Least-squares slope of log|u| against log r at critical points past ``r_lo``.

    ``c_low``/``C_high`` bracket ``(|u| + |u'| + |u''|) r^((N-1)/2)`` over the
    nodes in the fit range, with u'' taken from the equation.
    """
    r_lo = max(float(r_lo), 1.0)
    r_hi = traj.r_end if r_hi is None else min(float(r_hi), traj.r_end)
    crit = traj.criticals
    sel = (crit[:, 0] >= r_lo) & (crit[:, 0] <= r_hi) if crit.size else np.zeros(0, bool)
    pts = crit[sel] if crit.size else crit
    if pts.shape[0] < min_points:
        raise InsufficientRange(f"{pts.shape[0]} envelope points in [{r_lo}, {r_hi}]; "
                                f"need {min_points}")
    x, y = np.log(pts[:, 0]), np.log(np.abs(pts[:, 1]))
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    theory = (1.0 - traj.config.N) / 2.0
    m = (traj.r >= r_lo) & (traj.r <= r_hi)
    r, u, du = traj.r[m], traj.u[m], traj.du[m]
    triple = (np.abs(u) + np.abs(du) + np.abs(traj.u2(r, u, du))) * r ** (-theory)
    return DecayFit(float(coef[0]), float(triple.min()), float(triple.max()),
                    (r_lo, r_hi), resid, int(pts.shape[0]), theory)


@dataclass(frozen=True)
class PsiReport:
    passed: bool
    psi_min: float
    psi_max: float
    ratio: float


def check_psi_bounded(mon: MonitorSeries, r_star: float) -> PsiReport:
    """psi bounded away from 0 on [r_star, r_max] and flat over the last decade."""
    r_max = float(mon.r[-1])
    if r_max < 10.0 * r_star:
        raise InsufficientRange(f"r_max={r_max:g} < 10 r_star={10 * r_star:g}")
    m = mon.r >= r_star
    u = mon.u[m]
    if np.count_nonzero(np.diff(np.sign(u)) != 0) < 2:
        raise InsufficientRange("no oscillation on [r_star, r_max]")
    psi = mon.psi[m]
    last = mon.psi[mon.r >= r_max / 10.0]
    psi_min, psi_max = float(psi.min()), float(psi.max())
    ratio = float(last.max() / last.min()) if last.min() > 0 else math.inf
    return PsiReport(psi_min > 0 and ratio <= 1.5, psi_min, psi_max, ratio)


def sturm_coefficient(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """c(r) = g(r,u)/u - (N-1)(N-3)/(4r^2) at nodes with 0 < u < alpha_0."""
    spec, N = traj.spec, traj.config.N
    try:
        a0 = compute_alpha0(spec.at_infinity(), 0.0)
    except Exception:
        a0 = math.inf
    m = (traj.u > 0) & (traj.u < a0)
    r, u = traj.r[m], traj.u[m]
    return r, spec.g(r, u) / u - (N - 1) * (N - 3) / (4.0 * r * r)


@dataclass
class Classification:
    verdict: Verdict
    zero_count: int = 0
    z_margin: float | None = None
    envelope_ratio: float | None = None
    period: float | None = None
    notes: list[str] = field(default_factory=list)


def _spacing_spread(zeros: np.ndarray) -> float:
    gaps = np.diff(zeros)
    return float((gaps.max() - gaps.min()) / gaps.mean())


def classify(traj: Trajectory) -> Classification:
    cfg, spec = traj.config, traj.spec
    alpha = cfg.alpha
    if abs(alpha) <= cfg.atol:
        return Classification(Verdict.CONSTANT_ZERO)
    if spec.autonomous:
        try:
            a0 = compute_alpha0(spec, 0.0)
        except Exception:
            a0 = math.inf
        if math.isfinite(a0) and abs(abs(alpha) - a0) <= 1e-12:
            return Classification(Verdict.CONSTANT_ALPHA0)
    if traj.terminated_by is Termination.BLOWUP:
        return Classification(Verdict.BLOWUP)

    zeros = traj.zeros
    out = Classification(Verdict.UNDETERMINED, zero_count=int(zeros.size))
    if traj.terminated_by is Termination.STEP_FAILURE:
        out.notes.append(f"integration stopped early at r={traj.r_end:g}")
        return out
    if zeros.size < 4:
        out.notes.append(f"only {zeros.size} zeros on [0, {traj.r_end:g}]")
        return out

    zc = check_Z_monotone(compute_monitors(traj))
    out.z_margin = zc.max_violation
    if cfg.N == 1:
        spread = _spacing_spread(zeros)
        if spread < 1e-8 and zc.passed:
            out.verdict = Verdict.PERIODIC
            out.period = 2.0 * float(np.mean(np.diff(zeros)))
        else:
            out.notes.append(f"zero spacing spread {spread:.3g} or Z check failed")
        return out

    amp = np.abs(traj.criticals[:, 1])
    if amp.size:
        out.envelope_ratio = float(amp[-1] / abs(alpha))
    decreasing = amp.size >= 2 and bool(np.all(np.diff(amp) < 1e-12 * abs(alpha))) and amp[0] < abs(alpha)
    if not zc.passed:
        out.notes.append(f"Z increased by {zc.max_violation:.3g}")
    if not decreasing:
        out.notes.append("envelope of |u| at critical points is not decreasing")
    if zc.passed and decreasing:
        out.verdict = Verdict.OSCILLATING_LOCALIZED
    return out


def estimate_period(traj: Trajectory, rel_tol: float = 1e-8) -> float:
    """Twice the mean zero spacing of a one-dimensional periodic run."""
    if traj.config.N != 1:
        raise NotPeriodic("periods are defined for N = 1 only")
    zeros = traj.zeros
    if zeros.size < 3:
        raise NotPeriodic(f"only {zeros.size} zeros")
    spread = _spacing_spread(zeros)
    if spread >= rel_tol:
        raise NotPeriodic(f"zero spacing varies by {spread:.3g} (relative)")
    return 2.0 * float(np.mean(np.diff(zeros)))
