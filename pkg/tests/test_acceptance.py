"""Acceptance criteria, one test per criterion at the stated tolerances.

Each test prints a single PASS/FAIL line; the session summary repeats them.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np

from conftest import watson_lambda_origin
from friedrichs import asymptotics as A
from friedrichs.discrete_oracle import build, lowest_eigenvalue_dense, secular_root
from friedrichs.eigensolver import edge_delta, eigenvalue, monotonicity_check
from friedrichs.fredholm import ModelParams, delta_value, lambda_value, mu0, threshold_function_diagnostics
from friedrichs.lattice_dispersion import epsilon, lower_edge, u, u0, upper_edge
from friedrichs.torus_quadrature import DEFAULT_SPEC

PI = math.pi
R = (PI, PI, PI)


class Criterion:
    """Collects named sub-checks and reports them as one line."""

    def __init__(self, number, budget):
        self.number, self.budget = number, budget
        self.items = []
        self.t0 = time.perf_counter()

    def check(self, name, ok, detail=""):
        self.items.append((name, bool(ok), detail))

    def finish(self):
        elapsed = time.perf_counter() - self.t0
        self.check(f"runtime < {self.budget:g} s", elapsed < self.budget, f"{elapsed:.2f} s")
        failed = [f"{n} ({d})" if d else n for n, ok, d in self.items if not ok]
        status = "PASS" if not failed else "FAIL"
        print(f"\ncriterion {self.number}: {status}" + (": " + "; ".join(failed) if failed else ""))
        assert not failed, "; ".join(failed)


def test_criterion_01_closed_forms(ones, rng):
    c = Criterion(1, 1.0)
    p = rng.uniform(-PI, PI, size=(1000, 3))
    q = rng.uniform(-PI, PI, size=(1000, 3))
    eps_ref = 3 - np.cos(p[:, 0]) - np.cos(p[:, 1]) - np.cos(p[:, 2])
    c.check("epsilon", np.max(np.abs(epsilon(p) - eps_ref)) < 1e-13)
    c.check("u", np.max(np.abs(u(p, q) - (epsilon(p) + epsilon(p - q) + epsilon(q)))) < 1e-13)
    h = np.cos(p / 2)
    c.check("m", np.max(np.abs(lower_edge(p) - (eps_ref + np.sum(2 - 2 * h, axis=1)))) < 1e-13)
    c.check("M", np.max(np.abs(upper_edge(p) - (eps_ref + np.sum(2 + 2 * h, axis=1)))) < 1e-13)
    c.check("u0", np.max(np.abs(u0(p, q) - (u(p, q + p / 2) - lower_edge(p)))) < 1e-13)
    c.check("m <= u <= M", np.all(u(p, q) >= lower_edge(p) - 1e-13) and np.all(u(p, q) <= upper_edge(p) + 1e-13))
    worst = 0.0
    for _ in range(20):
        mu, z = rng.uniform(1e-3, 0.1), rng.uniform(-50, 11.5)
        d = delta_value(R, z, ModelParams(mu, ones))
        worst = max(worst, abs(d - (1 - mu * ones.l2_norm_sq / (12 - z))))
    c.check("degenerate determinant", worst < 1e-12, f"{worst:.1e}")
    c.finish()


def test_criterion_02_critical_coupling(ones, eps_ff):
    c = Criterion(2, 30.0)
    got = mu0(eps_ff)
    exact = 1 / (12 * PI**3)
    c.check("mu0(epsilon_type)", abs(got - exact) / exact < 1e-8, f"{got!r} vs {exact!r}")
    a, b = mu0(ones, DEFAULT_SPEC), mu0(ones, DEFAULT_SPEC.refined())
    c.check("mu0(1) refinement", abs(a - b) / b < 1e-6, f"{abs(a - b) / b:.1e}")
    watson = 1 / watson_lambda_origin()
    c.check("mu0(1) vs Watson", abs(a - watson) / watson < 1e-5, f"{abs(a - watson) / watson:.1e}")
    c.finish()


def test_criterion_03_zero_characterizations(ones, rng):
    c = Criterion(3, 120.0)
    m0 = mu0(ones)
    disagreements, worst = 0, 0.0
    for _ in range(30):
        mu = m0 * rng.uniform(0.3, 3.0)
        p = rng.uniform(-PI, PI, size=3)
        params = ModelParams(mu, ones)
        m = float(lower_edge(p))
        edge_negative = edge_delta(p, params) < 0
        zs = m - np.linspace(10.0, 0.0, 41) ** 2
        vals = [delta_value(p, z, params) for z in zs]
        sign_change = any(a > 0 > b or a > 0 == b for a, b in zip(vals, vals[1:]))
        state = eigenvalue(p, params)
        if not (state is not None) == edge_negative == sign_change:
            disagreements += 1
        if state is not None:
            worst = max(worst, abs(delta_value(p, state.e, params)))
    c.check("root <=> edge < 0 <=> sign change", disagreements == 0, f"{disagreements} disagreements")
    c.check("residual < 1e-9", worst < 1e-9, f"{worst:.1e}")
    c.finish()


def test_criterion_04_positive_eigenvalue(crit_ones, rng):
    c = Criterion(4, 180.0)
    pts = [np.array([0.05, 0, 0]), np.array([0, 0.05, 0]), np.array(R)]
    dirs = rng.normal(size=(47, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    pts += list(dirs * rng.uniform(0.05, PI, size=(47, 1)))
    bad = []
    for p in pts:
        s = eigenvalue(p, crit_ones)
        m = float(lower_edge(p))
        if s is None or not 0 < s.e < m:
            bad.append(tuple(np.round(p, 3)))
            continue
        # uniqueness: Delta is positive below the root and negative between the root and the edge
        below = delta_value(p, s.e - 0.5 * max(s.gap, 1e-3), crit_ones) > 0
        above = delta_value(p, s.e + 0.5 * s.gap, crit_ones) < 0 if s.gap > 1e-9 else True
        if not (below and above):
            bad.append(tuple(np.round(p, 3)))
    c.check("0 < e < m(p) unique", not bad, f"failing p: {bad[:3]}")
    e_r = eigenvalue(R, crit_ones).e
    exact = 12 - crit_ones.mu * (2 * PI) ** 3
    c.check("(pi,pi,pi) closed form", abs(e_r - exact) < 1e-8, f"{abs(e_r - exact):.1e}")
    c.finish()


def test_criterion_05_monotone_in_coupling(crit_ones):
    c = Criterion(5, 60.0)
    m0 = crit_ones.mu
    mus = [m0, 1.1 * m0, 1.5 * m0, 2 * m0]
    for p in [(1, 0.5, 0.2), R]:
        c.check(f"e decreasing at p={p}", monotonicity_check(p, mus, crit_ones))
    # at the origin e_mu0(0) is the threshold 0 itself (Delta_mu0(0, 0) = 0)
    e0 = [0.0] + [eigenvalue((0, 0, 0), crit_ones.with_mu(mu)).e for mu in mus[1:]]
    c.check("e decreasing at p=0", all(b < a for a, b in zip(e0, e0[1:])), str(e0))
    c.check("e_mu(0) < 0 for mu > mu0", all(e < 0 for e in e0[1:]))
    c.finish()


def test_criterion_06_expansion_slopes(crit_ones):
    c = Criterion(6, 300.0)
    w = A.fit_w_slope(crit_ones)
    c.check("w-slope vs pi^2 mu phi(0)^2 within 2%", w.rel_error <= 0.02,
            f"fitted {w.fitted_slope:.5f}, stated {w.theoretical_slope:.5f}")
    fits = [A.fit_p_slope(crit_ones, direction=d) for d in [(1, 0, 0), (1, 1, 1), (1, 1, 0)]]
    c.check("p-slope vs (sqrt3/2) pi^2 mu0 phi(0)^2 within 3%", fits[0].rel_error <= 0.03,
            f"fitted {fits[0].fitted_slope:.5f}, stated {fits[0].theoretical_slope:.5f}")
    a = [f.fitted_slope for f in fits]
    c.check("direction independence within 3%", (max(a) - min(a)) / a[0] <= 0.03)
    r = np.concatenate([A.sandwich_ratios(f) for f in fits])
    c.check("sandwich c1|p| <= Delta <= c2|p|", np.all((r >= 0.5) & (r <= 2.0)))
    c.finish()


def test_criterion_07_eigenvalue_regime(crit_eps):
    c = Criterion(7, 180.0)
    c.check("mu0 = 1/(12 pi^3)", abs(crit_eps.mu * 12 * PI**3 - 1) < 1e-8)
    fit = A.fit_p_slope(crit_eps)
    c.check("|p-slope| < 1e-4", abs(fit.fitted_slope) < 1e-4, f"{fit.fitted_slope:.1e}")
    b = A.quadratic_lower_bound(crit_eps, energy="edge", strict=False)
    c.check("Delta(p, m(p))/|p|^2 > 0", b.c > 0, f"min ratio {b.c:.4f}")
    c.check("max/min < 10", 0 < b.spread < 10, f"{b.spread:.3f}")
    c.finish()


def test_criterion_08_maximum_lemma(ones, crit_ones, rng):
    c = Criterion(8, 60.0)
    H = A.hessian_at_zero(crit_ones, strict=False)
    d = np.diag(H)
    c.check("diagonal negative", np.all(d < 0))
    c.check("diagonal equal within 1e-6", np.ptp(d) <= 1e-6 * np.abs(d).max(), f"{np.ptp(d):.1e}")
    off = np.abs(H - np.diag(d)).max()
    c.check("off-diagonal < 1e-3 |diag|", off < 1e-3 * np.abs(d).min(), f"{off:.1e}")
    top = lambda_value((0, 0, 0), 0.0, ones)
    p = rng.uniform(-PI, PI, size=(50, 3))
    c.check("Lambda(p,0) < Lambda(0,0)", all(lambda_value(x, 0.0, ones) < top for x in p))
    c.finish()


def test_criterion_09_oracle(ones, crit_ones, rng):
    c = Criterion(9, 300.0)
    worst = 0.0
    for k in range(20):
        n = (4, 6, 8, 10)[k % 4]
        p = rng.uniform(-PI, PI, size=3)
        params = crit_ones.with_mu(crit_ones.mu * rng.uniform(0.5, 3.0))
        model = build(p, params, n)
        worst = max(worst, abs(secular_root(model) - lowest_eigenvalue_dense(model)))
    c.check("secular vs dense < 1e-9", worst < 1e-9, f"{worst:.1e}")
    params = crit_ones.with_mu(2 * crit_ones.mu)
    cont = eigenvalue((1, 1, 1), params, tol=1e-13).e
    gaps = [abs(secular_root(build((1, 1, 1), params, n)) - cont) for n in (8, 10, 12, 16)]
    c.check("gap shrinks monotonically", all(b < a for a, b in zip(gaps, gaps[1:])), str(gaps))
    c.finish()


def test_criterion_10_threshold_function(crit_ones, crit_eps):
    c = Criterion(10, 60.0)
    radii = [0.2, 0.1, 0.05, 0.025]
    res = threshold_function_diagnostics(crit_ones, radii)
    ratios = [b.l2 / a.l2 for a, b in zip(res, res[1:])]
    c.check("resonance L2 ratio in [1.7, 2.3]", all(1.7 <= r <= 2.3 for r in ratios), str(ratios))
    l1 = [r.l1 for r in res]
    c.check("resonance L1 bounded", all(np.isfinite(l1)) and l1[-1] / l1[0] < 1.1, str(l1))
    ev = threshold_function_diagnostics(crit_eps, radii)
    ratios = [b.l2 / a.l2 for a, b in zip(ev, ev[1:])]
    c.check("eigenvalue L2 ratio < 1.2", all(r < 1.2 for r in ratios), str(ratios))
    c.finish()


SUITE = [
    ("edges", ["path.points=G;X;M;G;R", "path.steps=5"]),
    ("mu0", []),
    ("det-scan", ["scan.axis=z", "scan.num=6"]),
    ("band", ["path.points=G;X;M;G;R", "path.steps=3"]),
    ("asymptotics", []),
    ("oracle", ["mu=2*mu0"]),
]


def _run_suite(tmp_path, threads):
    outputs = {}
    for command, sets in SUITE:
        for fmt in ("csv", "json"):
            out = tmp_path / f"{command}-{threads}.{fmt}"
            argv = [sys.executable, "-m", "friedrichs.cli", command, "--format", fmt, "--out", str(out),
                    "--threads", str(threads)]
            for s in sets:
                argv += ["--set", s]
            proc = subprocess.run(argv, capture_output=True, env=dict(os.environ, PYTHONHASHSEED="0"))
            outputs[(command, fmt)] = (proc.returncode, out.read_bytes() if out.exists() else b"")
    return outputs


def test_criterion_11_determinism(tmp_path):
    c = Criterion(11, 600.0)
    one = _run_suite(tmp_path, 1)
    eight = _run_suite(tmp_path, 8)
    again = _run_suite(tmp_path, 1)
    for key in one:
        c.check(f"{key[0]} {key[1]} threads 1 vs 8", one[key] == eight[key])
        c.check(f"{key[0]} {key[1]} rerun", one[key] == again[key])
        c.check(f"{key[0]} {key[1]} produced output", len(one[key][1]) > 0)
    c.finish()
