"""Shooting solver for the radial problem

    -u'' - ((N-1)/r) u' = g(r, u),   u(0) = alpha,  u'(0) = 0.

The singular point r = 0 is stepped over with a second-order Taylor start at
``r0``; from there an embedded 8(5,3) Runge-Kutta pair (scipy's DOP853) takes
adaptive steps, and its per-step interpolants are kept as dense output.  Zeros
of u and u' are located on the dense output and refined by bracketing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize
from scipy.integrate import DOP853

from .errors import HypothesesFail, InvalidSpec, OutOfRange
from .nonlinearity import NonlinearitySpec, compute_alpha0

# interior probes per step; catches two sign changes inside one step
_PROBES = (0.25, 0.5, 0.75)


class Termination(str, Enum):
    REACHED_RMAX = "ReachedRmax"
    BLOWUP = "Blowup"
    STEP_FAILURE = "StepFailure"


@dataclass(frozen=True)
class SolveConfig:
    N: int = 3
    alpha: float = 0.5
    r_max: float = 200.0
    rtol: float = 1e-10
    atol: float = 1e-12
    r0: float = 1e-4
    blowup_factor: float = 2.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise InvalidSpec("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        for name in ("alpha", "r_max", "rtol", "atol", "r0", "blowup_factor"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidSpec(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if not 0 < self.r0 < 1:
            raise InvalidSpec("r0 must lie in (0, 1)")
        if not self.r_max > self.r0:
            raise InvalidSpec("r_max must exceed r0")
        if self.rtol < 1e-13 or self.atol <= 0:
            raise InvalidSpec("rtol must be >= 1e-13 and atol positive")
        if self.blowup_factor <= 1:
            raise InvalidSpec("blowup_factor must exceed 1")

    def with_(self, **changes) -> "SolveConfig":
        return SolveConfig(**{**self.__dict__, **changes})


@dataclass(frozen=True)
class Event:
    kind: str  # "zero", "max" or "min"
    r: float
    u: float
    du: float


class _Constant:
    """Dense output of an exact equilibrium segment."""

    def __init__(self, value):
        self.value = value

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.stack([np.full(r.shape, self.value), np.zeros(r.shape)])

    def scalar(self, r):
        return self.value, 0.0


class _Segment:
    """Order-7 interpolant of one DOP853 step (same polynomial as scipy's)."""

    __slots__ = ("t_old", "h", "y_old", "F", "_Fu", "_Fd")

    def __init__(self, t_old, h, y_old, F):
        self.t_old, self.h, self.y_old, self.F = t_old, h, y_old, F
        self._Fu = [float(f) for f in F[::-1, 0]]
        self._Fd = [float(f) for f in F[::-1, 1]]

    def scalar(self, t):
        x = (t - self.t_old) / self.h
        xm = 1.0 - x
        u = du = 0.0
        for i, (fu, fd) in enumerate(zip(self._Fu, self._Fd)):
            u += fu
            du += fd
            if i % 2 == 0:
                u *= x
                du *= x
            else:
                u *= xm
                du *= xm
        return u + self.y_old[0], du + self.y_old[1]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        x = ((t - self.t_old) / self.h)[..., None]
        y = np.zeros(t.shape + (2,))
        for i, f in enumerate(self.F[::-1]):
            y += f
            y *= x if i % 2 == 0 else 1.0 - x
        y += self.y_old
        return np.moveaxis(y, -1, 0)


@dataclass(frozen=True, eq=False)
class Trajectory:
    spec: NonlinearitySpec
    config: SolveConfig
    r: np.ndarray
    u: np.ndarray
    du: np.ndarray
    segments: tuple = field(repr=False)
    events: tuple[Event, ...]
    terminated_by: Termination
    equilibrium: bool = False

    @property
    def zeros(self) -> np.ndarray:
        return np.array([e.r for e in self.events if e.kind == "zero"])

    @property
    def criticals(self) -> np.ndarray:
        """Array of shape (n, 2) holding (r, u(r)) at every critical point."""
        pts = [(e.r, e.u) for e in self.events if e.kind != "zero"]
        return np.array(pts).reshape(-1, 2)

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    def u2(self, r=None, u=None, du=None):
        """u'' recovered from the equation (no differencing)."""
        if r is None:
            r, u, du = self.r, self.u, self.du
        N = self.config.N
        return -((N - 1) / r) * du - self.spec.g(r, u)


def taylor_start(spec: NonlinearitySpec, cfg: SolveConfig) -> tuple[float, float]:
    """State (u, u') at ``cfg.r0`` from the expansion u = alpha - g(0, alpha) r^2 / (2N)."""
    g0 = float(spec.g(0.0, cfg.alpha))
    if not math.isfinite(g0):
        raise InvalidSpec(f"g(0, {cfg.alpha}) is not finite")
    r0, N = cfg.r0, cfg.N
    return cfg.alpha - g0 * r0 * r0 / (2 * N), -g0 * r0 / N


def _blowup_level(spec: NonlinearitySpec, cfg: SolveConfig) -> float:
    scale = abs(cfg.alpha)
    for s in (spec, spec.at_infinity()):
        try:
            a0 = compute_alpha0(s, 0.0)
        except HypothesesFail:
            continue
        if math.isfinite(a0):
            scale = max(scale, a0)
    return cfg.blowup_factor * scale


def _is_equilibrium(spec: NonlinearitySpec, alpha: float) -> bool:
    if alpha == 0.0:
        return True
    if not spec.autonomous:
        return False
    try:
        a0 = compute_alpha0(spec, 0.0)
    except HypothesesFail:
        return False
    return math.isfinite(a0) and abs(abs(alpha) - a0) <= 1e-12 * max(1.0, a0)


def _constant_trajectory(spec, cfg) -> Trajectory:
    r = np.array([cfg.r0, cfg.r_max])
    u = np.full(2, cfg.alpha)
    return Trajectory(spec, cfg, r, u, np.zeros(2), (_Constant(cfg.alpha),), (),
                      Termination.REACHED_RMAX, equilibrium=True)


def _refine(f, a, b):
    return optimize.brentq(f, a, b, xtol=1e-15, rtol=1e-13, maxiter=200)


def _scan_step(seg, t0, t1, y0, y1):
    """Events inside one accepted step, ordered by radius."""
    ts = [t0] + [t0 + (t1 - t0) * x for x in _PROBES] + [t1]
    ys = [tuple(y0)] + [seg.scalar(t) for t in ts[1:-1]] + [tuple(y1)]
    found = []
    for comp in (0, 1):
        for j in range(len(ts) - 1):
            a, b = ys[j][comp], ys[j + 1][comp]
            if a == 0.0:
                continue
            if b == 0.0:
                root = ts[j + 1]
            elif (a < 0) != (b < 0):
                root = _refine(lambda t: seg.scalar(t)[comp], ts[j], ts[j + 1])
            else:
                continue
            u, du = ys[j + 1] if root == ts[j + 1] else seg.scalar(root)
            if comp == 0:
                found.append(Event("zero", float(root), float(u), float(du)))
            else:
                kind = "max" if u > 0 else "min"
                found.append(Event(kind, float(root), float(u), float(du)))
    found.sort(key=lambda e: e.r)
    return found


def integrate(spec: NonlinearitySpec, cfg: SolveConfig) -> Trajectory:
    """Integrate from ``cfg.r0`` to ``cfg.r_max`` (or until blow-up)."""
    if _is_equilibrium(spec, cfg.alpha):
        return _constant_trajectory(spec, cfg)

    N = cfg.N
    nm1 = float(N - 1)
    g = spec.scalar_g()

    def rhs(r, y):
        u, du = float(y[0]), float(y[1])
        return np.array([du, -nm1 / r * du - g(r, u)])

    u0, du0 = taylor_start(spec, cfg)
    solver = DOP853(rhs, cfg.r0, np.array([u0, du0]), cfg.r_max, rtol=cfg.rtol, atol=cfg.atol)
    level = _blowup_level(spec, cfg)

    rs, us, dus = [cfg.r0], [u0], [du0]
    segments = []
    events: list[Event] = []
    status = Termination.REACHED_RMAX
    for _ in range(cfg.max_steps):
        if solver.status != "running":
            break
        t0, y0 = solver.t, solver.y.copy()
        solver.step()
        if solver.status == "failed":
            status = Termination.STEP_FAILURE
            break
        t1, y1 = solver.t, solver.y.copy()
        if not np.all(np.isfinite(y1)):
            raise InvalidSpec(f"non-finite state at r={t1:g}; was the spec validated?")
        dense = solver.dense_output()
        seg = _Segment(dense.t_old, dense.h, dense.y_old, dense.F)
        segments.append(seg)
        rs.append(t1)
        us.append(y1[0])
        dus.append(y1[1])
        events.extend(_scan_step(seg, t0, t1, y0, y1))
        if abs(y1[0]) > level and y1[0] * y1[1] > 0:
            status = Termination.BLOWUP
            break
    else:
        status = Termination.STEP_FAILURE

    return Trajectory(spec, cfg, np.array(rs), np.array(us), np.array(dus),
                      tuple(segments), tuple(events), status)


def evaluate(traj: Trajectory, r: float) -> tuple[float, float]:
    """(u, u') at radius r via the stored dense output."""
    if not traj.r[0] <= r <= traj.r[-1]:
        raise OutOfRange(f"r={r} outside [{traj.r[0]}, {traj.r[-1]}]")
    i = int(np.searchsorted(traj.r, r))
    if i < traj.r.size and traj.r[i] == r:
        return float(traj.u[i]), float(traj.du[i])
    u, du = traj.segments[min(i - 1, len(traj.segments) - 1)].scalar(float(r))
    return float(u), float(du)


def evaluate_many(traj: Trajectory, r) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`evaluate`."""
    r = np.asarray(r, dtype=float)
    if r.size and (r.min() < traj.r[0] or r.max() > traj.r[-1]):
        raise OutOfRange("some radii lie outside the computed range")
    u = np.empty(r.shape)
    du = np.empty(r.shape)
    seg = np.clip(np.searchsorted(traj.r, r, side="right") - 1, 0, len(traj.segments) - 1)
    for s in np.unique(seg):
        mask = seg == s
        y = traj.segments[s](r[mask])
        u[mask], du[mask] = y[0], y[1]
    exact = np.searchsorted(traj.r, r)
    hit = (exact < traj.r.size) & (traj.r[np.minimum(exact, traj.r.size - 1)] == r)
    u[hit] = traj.u[exact[hit]]
    du[hit] = traj.du[exact[hit]]
    return u, du


def first_zero(traj: Trajectory) -> float | None:
    for e in traj.events:
        if e.kind == "zero":
            return e.r
    return None


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u", "du"])
        for r, u, du in zip(traj.r, traj.u, traj.du):
            w.writerow([repr(float(r)), repr(float(u)), repr(float(du))])


def write_events_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kind", "r", "u"])
        for e in traj.events:
            w.writerow([e.kind, repr(e.r), repr(e.u)])
