"""One test per acceptance criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that the terminal summary prints.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from conftest import ACCEPTANCE
from helmholtz_lab import continuum, diagnostics, domain_approx
from helmholtz_lab.diagnostics import Verdict
from helmholtz_lab.nonlinearity import (CoefficientFn, CoefficientKind, NonlinearitySpec,
                                        admissible_interval, compute_alpha0, defocusing_power,
                                        focusing_power, linear_helmholtz, saturable, validate_spec)
from helmholtz_lab.radial_ivp import SolveConfig, evaluate_many, integrate


class Checks:
    """Collects named sub-checks for one criterion."""

    def __init__(self, num):
        self.num = num
        self.items: list[tuple[str, bool, str]] = []

    def add(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    def finish(self):
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.items if not ok]
        ok = not failed
        shown = "; ".join(f"{n} [{d}]" if d else n for n, _, d in self.items)
        detail = shown if ok else "failed: " + "; ".join(failed)
        ACCEPTANCE[self.num] = (ok, detail)
        print(f"criterion {self.num}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail


G1 = saturable(0.25, 2.0)
G2 = defocusing_power(1.0, -1.0, 4.0)
G3 = focusing_power(1.0, 1.0, 4.0)


def test_criterion_01_linear_sinc():
    c = Checks(1)
    t0 = time.perf_counter()
    traj = integrate(linear_helmholtz(1.0), SolveConfig(N=3, alpha=1.0, r_max=100.0))
    elapsed = time.perf_counter() - t0
    zeros = traj.zeros[:10]
    zerr = float(np.max(np.abs(zeros - np.pi * np.arange(1, 11))))
    c.add("ten zeros at n*pi", zeros.size == 10 and zerr <= 1e-8, f"max err {zerr:.2e}")
    r = np.concatenate([traj.r, np.linspace(1e-4, 100.0, 20001)])
    u, _ = evaluate_many(traj, r)
    rel = float(np.max(np.abs(u - np.sin(r) / r) / (1.0 + r)))
    c.add("sin(r)/r", rel <= 1e-8, f"max err/(1+r) {rel:.2e}")
    c.add("runtime < 1 s", elapsed < 1.0, f"{elapsed:.2f} s")
    c.finish()


def test_criterion_02_linear_bessel():
    c = Checks(2)
    traj = integrate(linear_helmholtz(1.0), SolveConfig(N=2, alpha=1.0, r_max=500.0))
    r = np.linspace(1e-4, 50.0, 4001)
    u, _ = evaluate_many(traj, r)
    err = float(np.max(np.abs(u - oracles.j0(r))))
    c.add("alpha J0(r) on [1e-4, 50]", err <= 1e-7, f"max err {err:.2e}")
    fit = diagnostics.fit_decay_exponent(traj)
    c.add("decay exponent -0.5 +- 0.03", abs(fit.exponent + 0.5) <= 0.03, f"{fit.exponent:.4f}")
    c.finish()


def _criterion3_runs():
    for spec in (G1, G2):
        a0 = compute_alpha0(spec)
        for N in (2, 3):
            for alpha in continuum.default_alphas(spec):
                yield spec, N, float(alpha), a0


@pytest.fixture(scope="module")
def bound_runs():
    t0 = time.perf_counter()
    runs = [(spec, N, alpha, integrate(spec, SolveConfig(N=N, alpha=alpha)))
            for spec, N, alpha, _ in _criterion3_runs()]
    return runs, time.perf_counter() - t0


def test_criterion_03_w1inf_bounds(bound_runs):
    c = Checks(3)
    runs, elapsed = bound_runs
    worst_u = worst_du = -math.inf
    for spec, N, alpha, traj in runs:
        sup_u = max(float(np.max(np.abs(traj.u))), *(abs(e.u) for e in traj.events))
        sup_du = max(float(np.max(np.abs(traj.du))), *(abs(e.du) for e in traj.events))
        worst_u = max(worst_u, abs(sup_u - abs(alpha)))
        worst_du = max(worst_du, sup_du - math.sqrt(2.0 * float(spec.G(0.0, alpha))))
    c.add("132 runs", len(runs) == 132, str(len(runs)))
    c.add("sup|u| = |alpha|", worst_u <= 1e-8, f"worst {worst_u:.2e}")
    c.add("sup|u'| <= sqrt(2G(alpha))", worst_du <= 1e-8, f"worst excess {worst_du:.2e}")
    c.add("runtime < 30 s", elapsed < 30.0, f"{elapsed:.1f} s")
    c.finish()


def test_criterion_04_decay_law():
    c = Checks(4)
    for name, spec in (("g1", G1), ("g2", G2), ("g3", G3)):
        a0 = compute_alpha0(spec)
        alpha = 1.0 if not math.isfinite(a0) else a0 / 2
        for N in (2, 3, 4):
            traj = integrate(spec, SolveConfig(N=N, alpha=alpha, r_max=1000.0))
            fit = diagnostics.fit_decay_exponent(traj, r_lo=50.0)
            psi = diagnostics.check_psi_bounded(diagnostics.compute_monitors(traj), 50.0)
            c.add(f"{name} N={N} exponent", abs(fit.exponent - (1 - N) / 2) <= 0.05,
                  f"{fit.exponent:.4f}")
            c.add(f"{name} N={N} psi ratio", psi.ratio <= 1.5 and psi.psi_min > 0,
                  f"{psi.ratio:.3f}")
    c.finish()


def test_criterion_05_Z_monitor(bound_runs):
    c = Checks(5)
    runs, _ = bound_runs
    worst, n_osc = -math.inf, 0
    for spec, N, alpha, traj in runs:
        if diagnostics.classify(traj).verdict not in diagnostics.OSCILLATORY:
            continue
        n_osc += 1
        mon = diagnostics.compute_monitors(traj)
        inc = float(np.max(np.diff(mon.Z)))
        worst = max(worst, inc / (1.0 + abs(mon.Z[0])))
    c.add("oscillatory runs", n_osc == len(runs), f"{n_osc}/{len(runs)}")
    c.add("Z non-increasing", worst <= 1e-8, f"worst relative increase {worst:.2e}")
    traj = integrate(G2, SolveConfig(N=1, alpha=0.5, r_max=200.0))
    zc = diagnostics.check_Z_monotone(diagnostics.compute_monitors(traj))
    periods = traj.r_end / oracles.PERIOD_G2_05
    c.add("N=1 over >= 10 periods", periods >= 10, f"{periods:.1f}")
    c.add("N=1 Z conserved", zc.mode == "conserved" and zc.passed, f"drift {zc.max_violation:.2e}")
    c.finish()


def test_criterion_06_oscillation_chain():
    c = Checks(6)
    traj = integrate(G2, SolveConfig(N=3, alpha=0.5))
    rep = diagnostics.check_oscillation_chain(traj)
    chain = rep.chain[:21]
    c.add(">= 20 events", rep.n_events >= 20, str(rep.n_events))
    c.add("strictly decreasing", bool(np.all(np.diff(chain) < 0)),
          f"min drop {float(np.min(-np.diff(chain))):.2e}")
    c.add("interleaved zeros/extrema", rep.interleaved)
    c.finish()


def test_criterion_07_trichotomy():
    c = Checks(7)
    for name, spec in (("g1", G1), ("g2", G2)):
        a0 = compute_alpha0(spec)
        for N in (2, 3):
            cfg = SolveConfig(N=N, r_max=50.0)
            v = diagnostics.classify(integrate(spec, cfg.with_(alpha=0.0))).verdict
            c.add(f"{name} N={N} alpha=0", v is Verdict.CONSTANT_ZERO, v.value)
            traj = integrate(spec, cfg.with_(alpha=a0))
            v = diagnostics.classify(traj).verdict
            u, _ = evaluate_many(traj, np.linspace(cfg.r0, 50.0, 501))
            dev = float(np.max(np.abs(u - a0)))
            c.add(f"{name} N={N} alpha=alpha0", v is Verdict.CONSTANT_ALPHA0 and dev <= 1e-10,
                  f"{v.value}, dev {dev:.1e}")
            traj = integrate(spec, cfg.with_(alpha=1.5 * a0))
            v = diagnostics.classify(traj).verdict
            c.add(f"{name} N={N} alpha=1.5 alpha0",
                  v is Verdict.BLOWUP and bool(np.all(np.diff(traj.u) > 0)), v.value)
    c.finish()


def test_criterion_08_one_dimensional_period():
    c = Checks(8)
    traj = integrate(G2, SolveConfig(N=1, alpha=0.5))
    gaps = np.diff(traj.zeros)
    spread = float((gaps.max() - gaps.min()) / gaps.mean())
    c.add("alpha=0.5 zero spacing", spread <= 1e-8, f"spread {spread:.1e}")
    T = diagnostics.estimate_period(integrate(G2, SolveConfig(N=1, alpha=1e-3)))
    c.add("alpha=1e-3 period ~ 2pi", abs(T - 2 * math.pi) <= 1e-4, f"err {T - 2 * math.pi:.1e}")
    T = diagnostics.estimate_period(integrate(G2, SolveConfig(N=1, alpha=0.9)))
    ref = oracles.period_integral(oracles.g2_primitive, 0.9)
    c.add("alpha=0.9 period integral", abs(T - ref) <= 1e-6, f"err {T - ref:.1e}")
    c.finish()


def test_criterion_09_threshold():
    c = Checks(9)
    for name, spec, exact in (("g2", G2, 1.0), ("g1", G1, math.sqrt(2.0))):
        for N in (2, 3):
            br = continuum.bracket_threshold(spec, N)
            mid = 0.5 * (br.lo + br.hi)
            c.add(f"{name} N={N}", abs(mid - exact) <= 1e-5 and br.width <= 1e-6,
                  f"[{br.lo:.8f}, {br.hi:.8f}]")
    c.finish()


def test_criterion_10_first_zero_monotone():
    c = Checks(10)
    for name, spec in (("g1", G1), ("g2", G2)):
        a0 = compute_alpha0(spec)
        rep = continuum.first_zero_monotonicity(spec, 3, [f * a0 for f in (0.1, 0.3, 0.5, 0.7, 0.9)])
        c.add(f"{name} r1 increasing", rep.precondition and rep.strictly_increasing,
              str([round(z, 6) for z in rep.first_zeros]))
    r1 = continuum.first_zero_monotonicity(G2, 3, [1e-4]).first_zeros[0]
    c.add("g2 r1(1e-4) ~ pi", abs(r1 - math.pi) <= 1e-3, f"err {r1 - math.pi:.1e}")
    c.finish()


def test_criterion_11_eigenvalue():
    c = Checks(11)
    lam = domain_approx.lambda1(domain_approx.assemble(3, math.pi, 512))
    c.add("lambda1(B_pi) = 1", abs(lam - 1.0) <= 1e-3, f"{lam:.8f}")
    errs = [abs(domain_approx.lambda1(domain_approx.assemble(3, math.pi, m)) - 1.0)
            for m in (128, 256, 512)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    c.add("O(h^2) under doubling", all(1.8 <= p <= 2.2 for p in orders),
          ", ".join(f"{p:.3f}" for p in orders))
    c.finish()


def test_criterion_12_domain_degeneration():
    c = Checks(12)
    t0 = time.perf_counter()
    radii = [4.0, 8.0, 16.0, 32.0]
    study = domain_approx.domain_limit_study(G2, 3, radii, m_per_R=256)
    rows = study.rows
    last = rows[-1]
    c.add("all converged", all(r.converged for r in rows))
    c.add("u_center increasing", study.u_center_increasing)
    c.add("|u_center - 1| <= 0.01 at R=32", abs(last.u_center - 1) <= 0.01, f"{last.u_center:.6f}")
    c.add("energies strictly decreasing, negative", study.energy_decreasing_negative)
    dens_dev = abs(last.energy_density + 0.25) / 0.25
    c.add("energy/|B| within 15% of -1/4 at R=32", dens_dev <= 0.15,
          f"{last.energy_density:.4f}, off by {100 * dens_dev:.1f}%")
    slope = math.log(rows[-1].l2 / rows[-2].l2) / math.log(rows[-1].R / rows[-2].R)
    c.add("L2 slope 1.5 +- 0.1", abs(slope - 1.5) <= 0.1, f"{slope:.3f}")
    res = domain_approx.minimize_energy(domain_approx.assemble(3, 2.0, 512), G2)
    c.add("R=2 minimizer is zero", res.converged and not np.any(res.u) and res.energy == 0.0,
          f"max u {float(np.max(res.u)):.1e}")
    elapsed = time.perf_counter() - t0
    c.add("runtime < 2 min", elapsed < 120, f"{elapsed:.1f} s")
    c.finish()


def test_criterion_13_nonautonomous():
    c = Checks(13)
    exp = CoefficientKind.EXP_APPROACH
    spec = NonlinearitySpec("defocusing_power", k=CoefficientFn(exp, 1.0, 1.0, 1.0),
                            Q=CoefficientFn(exp, -1.0, 1.0, 1.0), p=4.0)
    c.add("power spec passes hypotheses", validate_spec(spec).passed)
    lo, hi = admissible_interval(spec)
    alpha = 0.5 * hi
    traj = integrate(spec, SolveConfig(N=3, alpha=alpha, r_max=1000.0))
    v = diagnostics.classify(traj).verdict
    fit = diagnostics.fit_decay_exponent(traj, r_lo=50.0)
    c.add("power verdict", v is Verdict.OSCILLATING_LOCALIZED, f"alpha={alpha:.5f}, {v.value}")
    c.add("power exponent -1 +- 0.05", abs(fit.exponent + 1.0) <= 0.05, f"{fit.exponent:.4f}")

    spec = NonlinearitySpec("saturable", lam=CoefficientFn(exp, 0.0, -1.0, 1.0), s=1.0)
    c.add("saturable spec passes hypotheses", validate_spec(spec).passed)
    lo, hi = admissible_interval(spec)
    c.add("saturable I = R", lo == -math.inf and hi == math.inf, f"({lo}, {hi})")
    traj = integrate(spec, SolveConfig(N=3, alpha=1.0, r_max=1000.0))
    v = diagnostics.classify(traj).verdict
    fit = diagnostics.fit_decay_exponent(traj, r_lo=50.0)
    c.add("saturable verdict", v is Verdict.OSCILLATING_LOCALIZED, v.value)
    c.add("saturable exponent -1 +- 0.05", abs(fit.exponent + 1.0) <= 0.05, f"{fit.exponent:.4f}")
    c.finish()


def _cli(tmp_path, tag, *args):
    out = tmp_path / f"{tag}.json"
    proc = subprocess.run([sys.executable, "-m", "helmholtz_lab", *args, "--out", str(out)],
                          capture_output=True, text=True)
    doc = json.loads(out.read_text())
    doc.pop("timing")
    return proc.returncode, doc


def test_criterion_14_determinism(tmp_path):
    c = Checks(14)
    outputs = []
    for i in range(2):
        traj_csv, ev_csv, sweep_csv = (tmp_path / f"{n}{i}.csv" for n in ("traj", "events", "sweep"))
        code1, solve = _cli(tmp_path, f"solve{i}", "solve", "g2", "--N", "3", "--alpha", "0.5",
                            "--csv", str(traj_csv), "--events", str(ev_csv))
        code2, sweep = _cli(tmp_path, f"sweep{i}", "sweep", "g1", "--N", "2",
                            "--alphas", "0.1 0.5 0.9 1.3", "--csv", str(sweep_csv))
        outputs.append((code1, code2, solve, sweep, traj_csv.read_bytes(), ev_csv.read_bytes(),
                        sweep_csv.read_bytes()))
    a, b = outputs
    c.add("exit codes", a[:2] == b[:2] == (0, 0), str(a[:2]))
    c.add("summaries identical modulo timing", a[2:4] == b[2:4])
    c.add("CSV byte-identical", a[4:] == b[4:])
    c.finish()
