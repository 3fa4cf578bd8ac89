"""Catalog of admissible nonlinearities g(r, z) and their structural constants.

Every family has a closed-form primitive ``G(r, z) = int_0^z g(r, t) dt`` and
closed-form partial derivatives, and is odd in ``z`` by construction.  The
radial coefficients (``k``, ``Q``, ``lam``, ``s``) are :class:`CoefficientFn`
instances, so the same family covers the autonomous and the nonautonomous
equation.

Families
--------
``saturable``          g = -lam(r) z + z / (s(r) + z^2)
``defocusing_power``   g = k(r)^2 z + Q(r) |z|^(p-2) z      (Q <= 0)
``focusing_power``     g = k(r)^2 z + Q(r) |z|^(p-2) z      (Q >= 0)
``concave_convex``     g = lam |z|^(q-2) z + mu |z|^(p-2) z  (1 < q < 2 < p)
``linear_helmholtz``   g = k^2 z
``pure_damping``       g = -z
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
from scipy import integrate, optimize

from .errors import HypothesesFail, InvalidSpec, NoSignChange

Z_MAX = 1.0e6


class CoefficientKind(str, Enum):
    CONSTANT = "constant"
    EXP_APPROACH = "exp_approach"
    RATIONAL_APPROACH = "rational_approach"


class Monotonicity(str, Enum):
    CONSTANT = "constant"
    NONINCREASING = "nonincreasing"
    NONDECREASING = "nondecreasing"


@dataclass(frozen=True)
class CoefficientFn:
    """Radial coefficient ``c(r) = c_inf + a * decay(r)``.

    ``decay(r)`` is ``exp(-rate * r)`` for ``exp_approach`` and
    ``(1 + r)**(-rate)`` for ``rational_approach``; ``constant`` ignores ``a``.
    """

    kind: CoefficientKind = CoefficientKind.CONSTANT
    c_inf: float = 0.0
    a: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", CoefficientKind(self.kind))
        for name in ("c_inf", "a", "rate"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidSpec(f"coefficient field {name} must be finite")
            object.__setattr__(self, name, value)
        if self.kind is CoefficientKind.CONSTANT:
            object.__setattr__(self, "a", 0.0)
        elif self.rate <= 0:
            raise InvalidSpec("coefficient decay rate must be positive")

    @classmethod
    def constant(cls, value: float) -> "CoefficientFn":
        return cls(CoefficientKind.CONSTANT, float(value))

    @classmethod
    def coerce(cls, value) -> "CoefficientFn":
        if isinstance(value, CoefficientFn):
            return value
        return cls.constant(value)

    @property
    def is_constant(self) -> bool:
        return self.kind is CoefficientKind.CONSTANT or self.a == 0.0

    @property
    def limit(self) -> float:
        return self.c_inf

    def decay(self, r):
        if self.kind is CoefficientKind.EXP_APPROACH:
            return np.exp(-self.rate * r)
        if self.kind is CoefficientKind.RATIONAL_APPROACH:
            return (1.0 + r) ** (-self.rate)
        return 0.0 * r

    def __call__(self, r):
        if self.is_constant:
            return self.c_inf
        return self.c_inf + self.a * self.decay(r)

    def derivative(self, r):
        if self.is_constant:
            return 0.0 * r
        if self.kind is CoefficientKind.EXP_APPROACH:
            return -self.a * self.rate * np.exp(-self.rate * r)
        return -self.a * self.rate * (1.0 + r) ** (-self.rate - 1.0)

    @property
    def monotonicity(self) -> Monotonicity:
        # both decay factors are decreasing, so the sign of a decides
        if self.is_constant:
            return Monotonicity.CONSTANT
        return Monotonicity.NONINCREASING if self.a > 0 else Monotonicity.NONDECREASING


class Family(str, Enum):
    SATURABLE = "saturable"
    DEFOCUSING_POWER = "defocusing_power"
    FOCUSING_POWER = "focusing_power"
    CONCAVE_CONVEX = "concave_convex"
    LINEAR_HELMHOLTZ = "linear_helmholtz"
    PURE_DAMPING = "pure_damping"


FAMILY_ALIASES = {
    "g1": Family.SATURABLE,
    "g2": Family.DEFOCUSING_POWER,
    "g3": Family.FOCUSING_POWER,
    "g4": Family.CONCAVE_CONVEX,
    "linear": Family.LINEAR_HELMHOLTZ,
    "damping": Family.PURE_DAMPING,
}

# coefficient names that each family reads, and the direction the
# nonautonomous existence theory requires of them
_COEFFICIENTS = {
    Family.SATURABLE: ("lam", "s"),
    Family.DEFOCUSING_POWER: ("k", "Q"),
    Family.FOCUSING_POWER: ("k", "Q"),
    Family.CONCAVE_CONVEX: ("lam", "mu"),
    Family.LINEAR_HELMHOLTZ: ("k",),
    Family.PURE_DAMPING: (),
}
_REQUIRED_MONOTONICITY = {
    Family.SATURABLE: Monotonicity.NONDECREASING,
    Family.DEFOCUSING_POWER: Monotonicity.NONINCREASING,
    Family.FOCUSING_POWER: Monotonicity.NONINCREASING,
}
_POWER = (Family.DEFOCUSING_POWER, Family.FOCUSING_POWER)


@dataclass(frozen=True)
class NonlinearitySpec:
    """One catalog nonlinearity.  Use the factory functions to build one."""

    family: Family
    k: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(1.0))
    Q: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(0.0))
    lam: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(0.0))
    s: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(1.0))
    mu: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(0.0))
    p: float = 4.0
    q: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("k", "Q", "lam", "s", "mu"):
            object.__setattr__(self, name, CoefficientFn.coerce(getattr(self, name)))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))
        fam = self.family
        if fam in _POWER and not self.p > 2:
            raise InvalidSpec("power nonlinearities need p > 2")
        if fam is Family.CONCAVE_CONVEX:
            if not 1 < self.q < 2 < self.p:
                raise InvalidSpec("concave-convex nonlinearity needs 1 < q < 2 < p")
            if not (self.lam.is_constant and self.mu.is_constant):
                raise InvalidSpec("concave-convex coefficients must be constant")
            if self.lam.c_inf <= 0:
                raise InvalidSpec("concave-convex nonlinearity needs lam > 0")
        if fam is Family.SATURABLE and (self.s(0.0) <= 0 or self.s.c_inf <= 0):
            raise InvalidSpec("saturation parameter s(r) must stay positive")
        if fam is Family.LINEAR_HELMHOLTZ:
            if not self.k.is_constant or self.k.c_inf <= 0:
                raise InvalidSpec("linear Helmholtz needs a constant k > 0")

    # -- structure -------------------------------------------------------

    @property
    def coefficient_names(self) -> tuple[str, ...]:
        return _COEFFICIENTS[self.family]

    def coefficients(self) -> dict[str, CoefficientFn]:
        return {name: getattr(self, name) for name in self.coefficient_names}

    @property
    def autonomous(self) -> bool:
        return all(c.is_constant for c in self.coefficients().values())

    def at_infinity(self) -> "NonlinearitySpec":
        """The autonomous limit spec with every coefficient replaced by its limit."""
        frozen = {name: CoefficientFn.constant(c.limit) for name, c in self.coefficients().items()}
        return NonlinearitySpec(self.family, **{**self._fields(), **frozen})

    def at_radius(self, r: float) -> "NonlinearitySpec":
        frozen = {name: CoefficientFn.constant(float(c(r))) for name, c in self.coefficients().items()}
        return NonlinearitySpec(self.family, **{**self._fields(), **frozen})

    def _fields(self) -> dict:
        return {"k": self.k, "Q": self.Q, "lam": self.lam, "s": self.s, "mu": self.mu, "p": self.p, "q": self.q}

    # -- closed forms ----------------------------------------------------
    # These accept scalars or arrays and perform no input checking; the
    # module-level eval_* functions are the checked public entry points.

    def g(self, r, z):
        fam = self.family
        if fam is Family.SATURABLE:
            return -self.lam(r) * z + z / (self.s(r) + z * z)
        if fam in _POWER:
            k = self.k(r)
            return k * k * z + self.Q(r) * np.abs(z) ** (self.p - 2.0) * z
        if fam is Family.CONCAVE_CONVEX:
            return (self.lam.c_inf * np.sign(z) * np.abs(z) ** (self.q - 1.0)
                    + self.mu.c_inf * np.abs(z) ** (self.p - 2.0) * z)
        if fam is Family.LINEAR_HELMHOLTZ:
            return self.k.c_inf ** 2 * z
        return -z

    def G(self, r, z):
        fam = self.family
        if fam is Family.SATURABLE:
            return -0.5 * self.lam(r) * z * z + 0.5 * np.log1p(z * z / self.s(r))
        if fam in _POWER:
            k = self.k(r)
            return 0.5 * k * k * z * z + self.Q(r) / self.p * np.abs(z) ** self.p
        if fam is Family.CONCAVE_CONVEX:
            return (self.lam.c_inf / self.q * np.abs(z) ** self.q
                    + self.mu.c_inf / self.p * np.abs(z) ** self.p)
        if fam is Family.LINEAR_HELMHOLTZ:
            return 0.5 * self.k.c_inf ** 2 * z * z
        return -0.5 * z * z

    def dg_dz(self, r, z):
        fam = self.family
        if fam is Family.SATURABLE:
            s = self.s(r)
            return -self.lam(r) + (s - z * z) / (s + z * z) ** 2
        if fam in _POWER:
            k = self.k(r)
            return k * k + (self.p - 1.0) * self.Q(r) * np.abs(z) ** (self.p - 2.0)
        if fam is Family.CONCAVE_CONVEX:
            with np.errstate(divide="ignore"):
                return ((self.q - 1.0) * self.lam.c_inf * np.abs(z) ** (self.q - 2.0)
                        + (self.p - 1.0) * self.mu.c_inf * np.abs(z) ** (self.p - 2.0))
        if fam is Family.LINEAR_HELMHOLTZ:
            return self.k.c_inf ** 2 + 0.0 * z
        return -1.0 + 0.0 * z

    def dg_dr(self, r, z):
        fam = self.family
        if fam is Family.SATURABLE:
            return -self.lam.derivative(r) * z - self.s.derivative(r) * z / (self.s(r) + z * z) ** 2
        if fam in _POWER:
            return (2.0 * self.k(r) * self.k.derivative(r) * z
                    + self.Q.derivative(r) * np.abs(z) ** (self.p - 2.0) * z)
        return 0.0 * z

    def scalar_g(self):
        """A float-only ``g(r, z)`` for hot loops; equals :meth:`g` on floats."""
        fam = self.family
        if not self.autonomous:
            g = self.g
            return lambda r, z: float(g(r, z))
        if fam is Family.SATURABLE:
            lam, s = self.lam.c_inf, self.s.c_inf
            return lambda r, z: -lam * z + z / (s + z * z)
        if fam in _POWER:
            k2, Q, e = self.k.c_inf ** 2, self.Q.c_inf, self.p - 2.0
            if e == 2.0:
                return lambda r, z: k2 * z + Q * (z * z) * z
            return lambda r, z: k2 * z + Q * abs(z) ** e * z
        if fam is Family.LINEAR_HELMHOLTZ:
            k2 = self.k.c_inf ** 2
            return lambda r, z: k2 * z
        g = self.g
        return lambda r, z: float(g(r, z))

    def slope_at_zero(self, r=0.0) -> float:
        """g_z(r, 0); ``inf`` for the sublinear concave-convex term."""
        if self.family is Family.CONCAVE_CONVEX:
            return math.inf
        return float(self.dg_dz(r, 0.0))

    def digest(self) -> str:
        import hashlib
        import json

        blob = json.dumps(spec_to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- factories -------------------------------------------------------------

def saturable(lam=0.25, s=2.0) -> NonlinearitySpec:
    return NonlinearitySpec(Family.SATURABLE, lam=lam, s=s)


def defocusing_power(k=1.0, Q=-1.0, p=4.0) -> NonlinearitySpec:
    return NonlinearitySpec(Family.DEFOCUSING_POWER, k=k, Q=Q, p=p)


def focusing_power(k=1.0, Q=1.0, p=4.0) -> NonlinearitySpec:
    return NonlinearitySpec(Family.FOCUSING_POWER, k=k, Q=Q, p=p)


def concave_convex(lam=1.0, mu=-1.0, q=1.5, p=4.0) -> NonlinearitySpec:
    return NonlinearitySpec(Family.CONCAVE_CONVEX, lam=lam, mu=mu, q=q, p=p)


def linear_helmholtz(k=1.0) -> NonlinearitySpec:
    return NonlinearitySpec(Family.LINEAR_HELMHOLTZ, k=k)


def pure_damping() -> NonlinearitySpec:
    return NonlinearitySpec(Family.PURE_DAMPING)


# -- checked evaluation ----------------------------------------------------

def _check_finite(r, z):
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(z))):
        raise ValueError("non-finite radius or argument")
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be nonnegative")


def eval_g(spec: NonlinearitySpec, r, z):
    _check_finite(r, z)
    return spec.g(r, z)


def eval_G(spec: NonlinearitySpec, r, z):
    _check_finite(r, z)
    return spec.G(r, z)


# -- alpha_0 ---------------------------------------------------------------

def compute_alpha0(spec: NonlinearitySpec, r: float = 0.0, z_max: float = Z_MAX) -> float:
    """First positive zero of ``z -> g(r, z)``, or ``inf`` if g stays positive."""
    fam = spec.family
    if spec.slope_at_zero(r) <= 0:
        raise HypothesesFail(f"g_z({r}, 0) <= 0: no positivity region near 0")
    if fam is Family.SATURABLE:
        lam, s = float(spec.lam(r)), float(spec.s(r))
        if lam <= 0:
            return math.inf
        return math.sqrt(1.0 / lam - s)
    if fam in _POWER:
        k, Q = float(spec.k(r)), float(spec.Q(r))
        if Q >= 0:
            return math.inf
        return (k * k / -Q) ** (1.0 / (spec.p - 2.0))
    if fam is Family.CONCAVE_CONVEX:
        mu = spec.mu.c_inf
        if mu >= 0:
            return math.inf
        return (spec.lam.c_inf / -mu) ** (1.0 / (spec.p - spec.q))
    if fam is Family.LINEAR_HELMHOLTZ:
        return math.inf
    return alpha0_by_bracketing(spec, r, z_max)


def alpha0_by_bracketing(spec: NonlinearitySpec, r: float = 0.0, z_max: float = Z_MAX) -> float:
    """Locate the first sign change of g(r, .) on (0, z_max] without closed forms."""
    grid = np.geomspace(1e-8, z_max, 2000)
    values = spec.g(r, grid)
    if values[0] <= 0:
        raise HypothesesFail("g is not positive just right of 0")
    negative = np.nonzero(values <= 0)[0]
    if negative.size == 0:
        raise NoSignChange(f"g({r}, z) > 0 for all sampled z <= {z_max:g}")
    j = negative[0]
    if values[j] == 0:
        return float(grid[j])
    return optimize.brentq(lambda z: spec.g(r, z), grid[j - 1], grid[j], xtol=1e-300, rtol=1e-13)


# -- hypothesis checks -----------------------------------------------------

@dataclass(frozen=True)
class GrowthWindow:
    alpha_lower: float
    alpha_upper: float
    lam: float
    Lam: float
    holds: bool


@dataclass
class HypothesisReport:
    oddness: bool
    oddness_defect: float
    positive_slope_at_zero: bool
    slope_min: float
    sign_change: Any  # float alpha_0, inf, or "fails"
    sign_change_ok: bool
    primitive_ok: bool
    primitive_defect: float
    coefficient_monotonicity: dict[str, bool]
    radial_sign: bool
    limits_ok: bool
    growth_window: GrowthWindow | None
    seed: int
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (self.oddness and self.positive_slope_at_zero and self.sign_change_ok
                and self.primitive_ok and all(self.coefficient_monotonicity.values())
                and self.radial_sign and self.limits_ok
                and (self.growth_window is None or self.growth_window.holds))


R_GRID = np.concatenate([[0.0], np.logspace(-3, 3, 511)])


def _z_window(spec: NonlinearitySpec) -> float:
    try:
        a0 = compute_alpha0(spec, 0.0)
    except (HypothesesFail, NoSignChange):
        return 10.0
    return 2.0 * a0 if math.isfinite(a0) else 10.0


def _primitive_defect(spec: NonlinearitySpec, r: float, z: float) -> float:
    quad, _ = integrate.quad(lambda t: spec.g(r, t), 0.0, z, epsabs=1e-13, epsrel=1e-13, limit=200)
    return abs(spec.G(r, z) - quad) / (1.0 + abs(z))


def coefficient_monotonicity(spec: NonlinearitySpec) -> tuple[dict[str, bool], list[str]]:
    """Check each coefficient's direction against what the family requires."""
    required = _REQUIRED_MONOTONICITY.get(spec.family)
    result: dict[str, bool] = {}
    notes: list[str] = []
    for name, coef in spec.coefficients().items():
        deriv = np.asarray(coef.derivative(R_GRID), dtype=float)
        flag = coef.monotonicity
        if flag is Monotonicity.CONSTANT:
            numeric_ok = bool(np.all(deriv == 0))
        elif flag is Monotonicity.NONINCREASING:
            numeric_ok = bool(np.all(deriv <= 0))
        else:
            numeric_ok = bool(np.all(deriv >= 0))
        ok = numeric_ok and (flag is Monotonicity.CONSTANT or flag is required)
        if not numeric_ok:
            notes.append(f"{name}: declared {flag.value} but sampled derivative disagrees")
        elif not ok:
            want = required.value if required else "constant"
            notes.append(f"{name}: {flag.value}, but this family needs {want} coefficients")
        result[name] = ok
    return result, notes


def validate_spec(spec: NonlinearitySpec, seed: int = 0) -> HypothesisReport:
    """Run the numeric hypothesis checks on fixed sample grids.

    Failures are recorded in the report; nothing is raised.
    """
    notes: list[str] = []
    rng = np.random.default_rng(seed)
    zw = _z_window(spec)
    z = np.concatenate([np.linspace(-zw, zw, 512), rng.uniform(-zw, zw, 64)])
    rr, zz = np.meshgrid(R_GRID, z, indexing="ij")

    g_plus = spec.g(rr, zz)
    g_minus = spec.g(rr, -zz)
    odd_defect = float(np.max(np.abs(g_minus + g_plus)))
    oddness = odd_defect == 0.0

    slopes = np.array([spec.slope_at_zero(r) for r in R_GRID])
    slope_min = float(np.min(slopes))
    slope_ok = slope_min > 0
    if not slope_ok:
        notes.append("g'(0) <= 0 somewhere")
        if bool(np.all(g_plus[zz != 0] * zz[zz != 0] < 0)):
            notes.append("non-existence regime: g(z)z < 0 for all z != 0, so there is no "
                         "nontrivial oscillating or localized solution")

    sign_change: Any = "fails"
    sign_ok = False
    if slope_ok:
        a0 = compute_alpha0(spec, 0.0)
        sign_change = a0
        sign_ok = _root_property(spec, 0.0, a0)
        if not spec.autonomous:
            a_inf = compute_alpha0(spec.at_infinity(), 0.0)
            sign_ok = sign_ok and _root_property(spec.at_infinity(), 0.0, a_inf)
        if not sign_ok:
            notes.append("sign pattern of g around alpha_0 not confirmed on samples")

    prim = max(_primitive_defect(spec, r, zv) for r in (0.0, 1.0, 10.0) for zv in (-zw / 2, 0.3 * zw, zw))
    prim_ok = prim <= 1e-8
    if not prim_ok:
        notes.append(f"primitive defect {prim:.3g} exceeds 1e-8")

    mono, mono_notes = coefficient_monotonicity(spec)
    notes.extend(mono_notes)

    with np.errstate(invalid="ignore"):
        gr_z = spec.dg_dr(rr, zz) * zz
    radial_sign = bool(np.all(gr_z <= 1e-14))
    if not radial_sign:
        notes.append("g_r(r,z) z > 0 somewhere on the sample grid")

    limits_ok = True
    for name, coef in spec.coefficients().items():
        if coef.is_constant:
            continue
        far = 1e3
        if not abs(coef(far) - coef.limit) <= abs(coef.a) * coef.decay(far) * (1 + 1e-12) + 1e-300:
            limits_ok = False
            notes.append(f"{name}: limit check failed")
    if spec.family is Family.SATURABLE and not spec.lam.limit < 1.0 / spec.s.limit:
        limits_ok = False
        notes.append("saturable family needs lam_inf < 1/s_inf")
    if spec.family in _POWER and spec.k.limit <= 0:
        limits_ok = False
        notes.append("power family needs k_inf > 0")
    if spec.family is Family.DEFOCUSING_POWER and np.any(spec.Q(R_GRID) > 0):
        notes.append("defocusing family with Q(r) > 0 somewhere")
    if spec.family is Family.FOCUSING_POWER and np.any(spec.Q(R_GRID) < 0):
        notes.append("focusing family with Q(r) < 0 somewhere")

    window = None
    if spec.family in _POWER and not spec.autonomous and slope_ok and all(mono.values()) and limits_ok:
        lo, hi = admissible_interval(spec)
        alpha = 0.5 * hi if math.isfinite(hi) else 1.0
        window = growth_window(spec, alpha)
        if not window.holds:
            notes.append("growth window inequality fails on the sample grid")

    return HypothesisReport(
        oddness=oddness, oddness_defect=odd_defect,
        positive_slope_at_zero=slope_ok, slope_min=slope_min,
        sign_change=sign_change, sign_change_ok=sign_ok,
        primitive_ok=prim_ok, primitive_defect=prim,
        coefficient_monotonicity=mono, radial_sign=radial_sign, limits_ok=limits_ok,
        growth_window=window, seed=seed, notes=notes,
    )


def _root_property(spec: NonlinearitySpec, r: float, a0: float) -> bool:
    if not math.isfinite(a0):
        zs = np.geomspace(1e-6, 1e3, 400)
        return bool(np.all(spec.g(r, zs) > 0))
    if abs(spec.g(r, a0)) > 1e-10:
        return False
    inside = np.linspace(0, a0, 258)[1:-1]
    outside = np.linspace(a0, 2 * a0, 258)[1:-1]
    return bool(np.all(spec.g(r, inside) > 0) and np.all(spec.g(r, outside) < 0))


# -- admissible interval ---------------------------------------------------

def sup_limit_energy(spec: NonlinearitySpec) -> float:
    """``sup_z G_inf(z)`` in closed form (``inf`` when unbounded)."""
    lim = spec.at_infinity()
    if spec.family in _POWER:
        k2, Q = lim.k.c_inf ** 2, lim.Q.c_inf
        if Q >= 0:
            return math.inf
        return (0.5 - 1.0 / spec.p) * k2 * (k2 / -Q) ** (2.0 / (spec.p - 2.0))
    a0 = compute_alpha0(lim, 0.0)
    if not math.isfinite(a0):
        return math.inf
    return float(lim.G(0.0, a0))


def interval_from_energy_level(spec: NonlinearitySpec, level: float) -> tuple[float, float]:
    """Connected component around 0 of ``{alpha : G(0, alpha) < level}``."""
    if not math.isfinite(level):
        return (-math.inf, math.inf)
    f = lambda a: float(spec.G(0.0, a)) - level
    g0 = lambda a: float(spec.g(0.0, a))
    grid = np.geomspace(1e-8, Z_MAX, 4000)
    vals = spec.G(0.0, grid) - level
    if vals[0] >= 0:
        raise HypothesesFail("energy level is not above G(0, 0+)")
    tol = 1e-12 * (1.0 + abs(level))
    for j in range(1, grid.size):
        if vals[j] >= 0:
            edge = optimize.brentq(f, grid[j - 1], grid[j], xtol=1e-300, rtol=1e-14)
            return (-edge, edge)
        if (j + 1 < grid.size and vals[j] > vals[j - 1] and vals[j] >= vals[j + 1]
                and g0(grid[j - 1]) > 0 > g0(grid[j + 1])):
            # local maximum of G(0, .): the level may be touched tangentially
            top = optimize.brentq(g0, grid[j - 1], grid[j + 1], xtol=1e-300, rtol=1e-14)
            if f(top) >= -tol:
                return (-top, top)
    return (-math.inf, math.inf)


def admissible_interval(spec: NonlinearitySpec) -> tuple[float, float]:
    """Open interval of shooting values covered by the existence theory."""
    if spec.autonomous:
        a0 = compute_alpha0(spec, 0.0)
        return (-a0, a0)
    if spec.family not in (*_POWER, Family.SATURABLE):
        raise HypothesesFail(f"no nonautonomous theory for {spec.family.value}")
    mono, notes = coefficient_monotonicity(spec)
    if not all(mono.values()):
        raise HypothesesFail("; ".join(notes))
    if spec.family in _POWER and spec.k.limit <= 0:
        raise HypothesesFail("k_inf must be positive")
    if spec.family is Family.SATURABLE and not spec.lam.limit < 1.0 / spec.s.limit:
        raise HypothesesFail("lam_inf < 1/s_inf is required")
    return interval_from_energy_level(spec, sup_limit_energy(spec))


def growth_window(spec: NonlinearitySpec, alpha: float, r_check: float = 1e3) -> GrowthWindow:
    """Window ``[-a, a]`` with ``G_inf(a) = G(0, alpha)`` and its growth constants.

    Power family only.  ``holds`` records a sampled check of
    ``lam z^2 <= g_inf(z) z <= g(r, z) z <= Lam z^2``.
    """
    if spec.family not in _POWER:
        raise HypothesesFail("growth window is defined for the power family")
    lim = spec.at_infinity()
    level = float(spec.G(0.0, alpha))
    k2_inf, Q_inf = lim.k.c_inf ** 2, lim.Q.c_inf
    q_minus = max(-Q_inf, 0.0)
    cap = (k2_inf / q_minus) ** (1.0 / (spec.p - 2.0)) if q_minus > 0 else Z_MAX
    if not level < float(lim.G(0.0, cap)):
        raise HypothesesFail(f"alpha={alpha} lies outside the admissible interval")
    a_star = optimize.brentq(lambda a: float(lim.G(0.0, a)) - level, 0.0, cap, xtol=1e-300, rtol=1e-14)
    lam = k2_inf - q_minus * a_star ** (spec.p - 2.0)
    Lam = float(spec.k(0.0)) ** 2 + abs(float(spec.Q(0.0))) * a_star ** (spec.p - 2.0)

    r = np.concatenate([[0.0], np.geomspace(1e-3, r_check, 256)])
    z = np.linspace(-a_star, a_star, 257)
    rr, zz = np.meshgrid(r, z, indexing="ij")
    gz = spec.g(rr, zz) * zz
    ginf_z = lim.g(0.0, z) * z
    slack = 1e-12 * (1.0 + zz * zz)
    holds = bool(lam > 0
                 and np.all(lam * z * z <= ginf_z + slack[0])
                 and np.all(ginf_z[None, :] <= gz + slack)
                 and np.all(gz <= Lam * zz * zz + slack))
    return GrowthWindow(a_star, a_star, float(lam), float(Lam), holds)


# -- serialization ---------------------------------------------------------

_PARAMETERS = {
    Family.SATURABLE: ("lam", "s"),
    Family.DEFOCUSING_POWER: ("k", "Q", "p"),
    Family.FOCUSING_POWER: ("k", "Q", "p"),
    Family.CONCAVE_CONVEX: ("lam", "mu", "q", "p"),
    Family.LINEAR_HELMHOLTZ: ("k",),
    Family.PURE_DAMPING: (),
}


def coefficient_to_dict(c: CoefficientFn) -> dict:
    return {"family": c.kind.value, "c_inf": c.c_inf, "a": c.a, "b_or_gamma": c.rate}


def coefficient_from_dict(data) -> CoefficientFn:
    if isinstance(data, (int, float)) and not isinstance(data, bool):
        return CoefficientFn.constant(float(data))
    if not isinstance(data, dict):
        raise InvalidSpec(f"coefficient must be a number or a block, got {data!r}")
    unknown = set(data) - {"family", "c_inf", "a", "b_or_gamma"}
    if unknown:
        raise InvalidSpec(f"unknown coefficient fields {sorted(unknown)}")
    try:
        return CoefficientFn(CoefficientKind(data.get("family", "constant")),
                             float(data.get("c_inf", 0.0)), float(data.get("a", 0.0)),
                             float(data.get("b_or_gamma", 1.0)))
    except (TypeError, ValueError) as exc:
        raise InvalidSpec(str(exc)) from exc


def spec_to_dict(spec: NonlinearitySpec) -> dict:
    params = {}
    for name in _PARAMETERS[spec.family]:
        value = getattr(spec, name)
        params[name] = coefficient_to_dict(value) if isinstance(value, CoefficientFn) else value
    return {"family": spec.family.value, "parameters": params}


def spec_from_dict(data: dict) -> NonlinearitySpec:
    if not isinstance(data, dict) or "family" not in data:
        raise InvalidSpec("spec document needs a 'family' field")
    name = str(data["family"])
    try:
        family = FAMILY_ALIASES.get(name) or Family(name)
    except ValueError:
        raise InvalidSpec(f"unknown family {name!r}; choose from "
                          f"{[f.value for f in Family]}") from None
    params = dict(data.get("parameters", {}))
    allowed = _PARAMETERS[family]
    unknown = set(params) - set(allowed)
    if unknown:
        raise InvalidSpec(f"unknown parameters {sorted(unknown)} for {family.value}")
    kwargs: dict[str, Any] = {}
    for key, value in params.items():
        if key in ("p", "q"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidSpec(f"{key} must be a number")
            kwargs[key] = float(value)
        else:
            kwargs[key] = coefficient_from_dict(value)
    defaults = {
        Family.SATURABLE: saturable, Family.DEFOCUSING_POWER: defocusing_power,
        Family.FOCUSING_POWER: focusing_power, Family.CONCAVE_CONVEX: concave_convex,
        Family.LINEAR_HELMHOLTZ: linear_helmholtz, Family.PURE_DAMPING: pure_damping,
    }
    return defaults[family](**kwargs)
