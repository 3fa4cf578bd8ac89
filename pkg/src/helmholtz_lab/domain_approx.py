"""Energy minimizers on balls B_R in the radial class.

The radial Dirichlet problem is discretized by a cell-centred finite-volume
scheme: node i sits at r_i = i h (i = 0..m-1), its cell is
[r_i - h/2, r_i + h/2] clipped at 0, and the flux between nodes i and i+1 is
weighted by the sphere area at r_{i+1/2}.  u_m = 0 at r = R.  This gives a
symmetric tridiagonal stiffness S, a diagonal mass (exact cell volumes) and
the discrete energy

    I(u) = 1/2 <S u, u> - sum_i w_i G(u_i).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import HypothesesFail, InvalidSpec, NoConvergence
from .nonlinearity import NonlinearitySpec, compute_alpha0


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere S^{N-1} (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)


def ball_volume(N: int, R: float) -> float:
    return sphere_area(N) * R ** N / N


@dataclass(frozen=True, eq=False)
class RadialMesh:
    N: int
    R: float
    m: int
    h: float
    r: np.ndarray
    weights: np.ndarray
    diag: np.ndarray
    off: np.ndarray  # off[i] couples nodes i and i+1

    @property
    def volume(self) -> float:
        return ball_volume(self.N, self.R)

    def stiffness(self, u: np.ndarray) -> np.ndarray:
        out = self.diag * u
        out[:-1] += self.off * u[1:]
        out[1:] += self.off * u[:-1]
        return out

    def banded(self, shift: float = 0.0) -> np.ndarray:
        """Upper banded form of S + shift * M for scipy's banded solvers."""
        ab = np.zeros((2, self.m))
        ab[0, 1:] = self.off
        ab[1] = self.diag + shift * self.weights
        return ab

    def dense_stiffness(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    @property
    def boundary_weight(self) -> float:
        """Volume of the half cell [R - h/2, R] owned by the Dirichlet node."""
        return sphere_area(self.N) * (self.R ** self.N - (self.R - 0.5 * self.h) ** self.N) / self.N

    def integrate(self, f: np.ndarray, boundary_value: float = 0.0) -> float:
        return float(np.dot(self.weights, f) + self.boundary_weight * boundary_value)

    def lq_norm(self, u: np.ndarray, q: float) -> float:
        return float(np.dot(self.weights, np.abs(u) ** q) ** (1.0 / q))


def assemble(N: int, R: float, m: int) -> RadialMesh:
    if m < 64:
        raise InvalidSpec("mesh needs m >= 64 nodes")
    if R <= 0 or N < 1:
        raise InvalidSpec("need R > 0 and N >= 1")
    h = R / m
    omega = sphere_area(N)
    i = np.arange(m, dtype=float)
    r = i * h
    outer = np.minimum((i + 0.5) * h, R)
    inner = np.maximum((i - 0.5) * h, 0.0)
    weights = omega * (outer ** N - inner ** N) / N
    flux = omega * ((i + 0.5) * h) ** (N - 1) / h  # between i and i+1, i = 0..m-1
    diag = flux.copy()
    diag[1:] += flux[:-1]
    off = -flux[:-1]
    return RadialMesh(N, float(R), int(m), h, r, weights, diag, off)


def lambda1(mesh: RadialMesh, tol: float = 1e-10, max_iter: int = 1000,
            return_vector: bool = False):
    """Smallest eigenvalue of S phi = lam M phi by inverse power iteration.

    Convergence is measured on the inverse pencil, ``|x - lam S^-1 M x|_M``
    relative to ``|x|_M``; the forward residual ``S x - lam M x`` has a
    rounding floor near eps / (h^2 lam) on fine meshes.
    """
    chol = linalg.cholesky_banded(mesh.banded())
    w = mesh.weights
    x = np.ones(mesh.m)
    x /= math.sqrt(np.dot(w, x * x))
    for _ in range(max_iter):
        y = linalg.cho_solve_banded((chol, False), w * x)
        lam = 1.0 / float(np.dot(w, x * y))  # x is M-normalized
        res = x - lam * y
        rel = math.sqrt(np.dot(w, res * res))
        x = y / math.sqrt(np.dot(w, y * y))
        if rel <= tol:
            lam = float(np.dot(x, mesh.stiffness(x)))
            if x[0] < 0:
                x = -x
            return (lam, x) if return_vector else lam
    raise NoConvergence(f"inverse iteration did not reach {tol:g} in {max_iter} steps")


@dataclass
class MinimizerResult:
    u: np.ndarray
    energy: float
    iterations: int
    converged: bool
    u_center: float
    norms: dict[float, float]
    lambda1: float
    stationarity: float
    energy_history: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))


def energy(mesh: RadialMesh, spec: NonlinearitySpec, u: np.ndarray) -> float:
    return float(0.5 * np.dot(u, mesh.stiffness(u)) - np.dot(mesh.weights, spec.G(0.0, u)))


def energy_gradient(mesh: RadialMesh, spec: NonlinearitySpec, u: np.ndarray) -> np.ndarray:
    return mesh.stiffness(u) - mesh.weights * spec.g(0.0, u)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def energy_change(mesh: RadialMesh, spec: NonlinearitySpec, u: np.ndarray, d: np.ndarray) -> float:
    """I(u + d) - I(u) without cancellation against the full energies.

    The potential part integrates g along each segment [u_i, u_i + d_i] by
    4-point Gauss-Legendre, exact for polynomial g up to degree 7.
    """
    quad = sum(wk * spec.g(0.0, u + xk * d) for xk, wk in zip(_GL_X, _GL_W))
    return float(np.dot(d, mesh.stiffness(u)) + 0.5 * np.dot(d, mesh.stiffness(d))
                 - np.dot(mesh.weights, d * quad))


def _stationarity(mesh, u, grad, upper) -> float:
    # projected step in the lumped L2 metric, measured in that metric
    step = u - np.clip(u - grad / mesh.weights, 0.0, upper)
    return float(math.sqrt(np.dot(mesh.weights, step * step)))


def minimize_energy(mesh: RadialMesh, spec: NonlinearitySpec, init="eigenfunction",
                    tol: float = 1e-9, max_iter: int = 10_000) -> MinimizerResult:
    """Projected descent for I on the box 0 <= u <= alpha_0.

    Search directions are gradients taken in the H^1-type metric
    ``S + c M`` (c bounds |g'| on [0, alpha_0]), which removes the h^-2
    stiffness of the plain Euclidean gradient.  Each trial point is clamped
    back into the box and accepted only under an Armijo decrease, measured by
    :func:`energy_change`, so iterate energies never increase.
    """
    if not spec.autonomous:
        raise HypothesesFail("minimization needs an autonomous nonlinearity")
    a0 = compute_alpha0(spec, 0.0)
    if not math.isfinite(a0):
        raise HypothesesFail("alpha_0 = inf: the energy need not be bounded below")
    lam1, phi = lambda1(mesh, return_vector=True)
    slope = spec.slope_at_zero()

    if isinstance(init, str):
        if init != "eigenfunction":
            raise InvalidSpec(f"unknown init {init!r}")
        if slope > lam1:
            u = 0.5 * a0 * phi / np.max(np.abs(phi))
        else:
            u = np.zeros(mesh.m)
    else:
        u = np.clip(np.asarray(init, dtype=float).copy(), 0.0, a0)
        if u.shape != (mesh.m,):
            raise InvalidSpec("initial vector has the wrong length")

    zs = np.linspace(0.0, a0, 257)[1:]
    shift = max(1.0, float(np.max(np.abs(spec.dg_dz(0.0, zs)))))
    chol = linalg.cholesky_banded(mesh.banded(shift))

    E = energy(mesh, spec, u)
    history = [E]
    grad = energy_gradient(mesh, spec, u)
    stat = _stationarity(mesh, u, grad, a0)
    converged = stat <= tol * (1.0 + abs(E))
    it = 0
    while not converged and it < max_iter:
        it += 1
        d = -linalg.cho_solve_banded((chol, False), grad)
        t = 1.0
        while True:
            step = np.clip(u + t * d, 0.0, a0) - u
            dE = energy_change(mesh, spec, u, step)
            if dE <= 1e-4 * np.dot(grad, step):
                break
            t *= 0.5
            if t < 1e-12:
                break
        if not dE <= 0.0 or not np.any(step):
            break  # no admissible decrease left at working precision
        u = np.clip(u + step, 0.0, a0)
        E += dE
        history.append(E)
        grad = energy_gradient(mesh, spec, u)
        stat = _stationarity(mesh, u, grad, a0)
        converged = stat <= tol * (1.0 + abs(E))
    E = energy(mesh, spec, u)

    norms = {q: mesh.lq_norm(u, q) for q in (1, 2, 4)}
    return MinimizerResult(u, E, it, bool(converged), float(u[0]), norms, lam1, stat,
                           np.array(history))


@dataclass
class DomainRow:
    R: float
    m: int
    lambda1: float
    u_center: float
    energy: float
    energy_density: float
    l1: float
    l2: float
    l4: float
    converged: bool


@dataclass
class DomainStudy:
    rows: list[DomainRow]
    u_center_increasing: bool
    energy_decreasing_negative: bool
    norms_increasing: bool

    @property
    def passed(self) -> bool:
        return self.u_center_increasing and self.energy_decreasing_negative and self.norms_increasing


def _solve_radius(args) -> DomainRow:
    spec, N, R, m = args
    mesh = assemble(N, R, m)
    res = minimize_energy(mesh, spec)
    return DomainRow(R, m, res.lambda1, res.u_center, res.energy, res.energy / mesh.volume,
                     res.norms[1], res.norms[2], res.norms[4], res.converged)


def domain_limit_study(spec: NonlinearitySpec, N: int, radii, m_per_R: float = 256,
                       workers: int = 1) -> DomainStudy:
    """Minimizers on growing balls, with the three degeneration trends checked."""
    radii = [float(R) for R in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise InvalidSpec("radii must be strictly increasing")
    lam_min = lambda1(assemble(N, radii[0], max(64, int(round(m_per_R * radii[0])))))
    if not spec.slope_at_zero() > lam_min:
        raise HypothesesFail(f"lambda_1(B_{radii[0]:g}) = {lam_min:.4g} >= g'(0)")
    jobs = [(spec, N, R, max(64, int(round(m_per_R * R)))) for R in radii]
    rows = _map(_solve_radius, jobs, workers)
    uc = [row.u_center for row in rows]
    en = [row.energy for row in rows]
    inc = lambda xs: all(b > a for a, b in zip(xs, xs[1:]))
    return DomainStudy(
        rows,
        u_center_increasing=inc(uc),
        energy_decreasing_negative=inc([-e for e in en]) and all(e < 0 for e in en),
        norms_increasing=all(inc([getattr(row, q) for row in rows]) for q in ("l1", "l2", "l4")),
    )


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def write_table_csv(study: DomainStudy, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["R", "lambda1", "u_center", "energy", "energy_density", "l1", "l2", "l4"])
        for row in study.rows:
            w.writerow([repr(v) for v in (row.R, row.lambda1, row.u_center, row.energy,
                                          row.energy_density, row.l1, row.l2, row.l4)])


def write_minimizer_csv(mesh: RadialMesh, result: MinimizerResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "u"])
        for r, u in zip(mesh.r, result.u):
            w.writerow([repr(float(r)), repr(float(u))])
        w.writerow([repr(mesh.R), repr(0.0)])
