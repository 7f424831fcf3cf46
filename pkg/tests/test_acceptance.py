"""Acceptance suite: ten criteria, each checked at its stated tolerance and
time budget.  Every criterion prints one PASS/FAIL line; the lines are
repeated in the pytest terminal summary.  Run directly with
``python3 tests/test_acceptance.py`` to see only the verdicts.
"""
import functools
import math
import time
import timeit

import numpy as np
from scipy.integrate import simpson

from flashsinter import (
    ControlMode,
    ControlSchedule,
    DimensionalParameters,
    DimensionlessGroups,
    Geometry,
    SolverOptions,
    SpatialGrid,
    axial_critical_lambda,
    axial_steady_current,
    axial_steady_voltage,
    critical_field,
    evaluate_profile,
    flash_condition,
    high_aspect_critical,
    lumped_flash_criterion,
    nondimensionalize,
    radial_critical_lambda,
    radial_steady_current,
    radial_steady_voltage,
    regime_diagram,
    solve_axial,
    solve_lumped,
    solve_radial,
)

RESULTS = []

VOLT = ControlSchedule(mode=ControlMode.VOLTAGE_ONLY)


def criterion(number, title, budget):
    """Run a check function returning ``[(label, ok), ...]``, add the time
    budget, print one verdict line and fail the test if anything failed."""

    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            try:
                checks = list(fn())
            except Exception as exc:
                line = f"FAIL  [{number:2d}] {title}: {type(exc).__name__}: {exc}"
                RESULTS.append(line)
                print(line)
                raise
            elapsed = time.perf_counter() - t0
            checks.append((f"runtime {elapsed:.3g} s < {budget:g} s", elapsed < budget))
            failed = [label for label, ok in checks if not ok]
            status = "PASS" if not failed else "FAIL"
            detail = "; ".join(label for label, _ in checks) if not failed else "failed: " + "; ".join(failed)
            line = f"{status}  [{number:2d}] {title}: {detail}"
            RESULTS.append(line)
            print(line)
            assert not failed, line

        return run

    return wrap


def max_gap(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


# --------------------------------------------------------------------------

@criterion(1, "nondimensionalization of the reference inputs", budget=1.0)
def test_criterion_01_nondimensionalization():
    p = DimensionalParameters.table1()
    g = nondimensionalize(p)
    ref = dict(delta=0.15, lambda_=0.104, beta=0.126, alpha=0.037, curlyI=284, nu=0.054, sigma0=8.30e-3, t0=3.025)
    checks = []
    for name, value in ref.items():
        rel = abs(getattr(g, name) / value - 1.0)
        checks.append((f"{name} {getattr(g, name):.4g} ({rel:.2%})", rel < 0.01))
    per_call = min(timeit.repeat(lambda: nondimensionalize(p), number=200, repeat=5)) / 200
    checks.append((f"{per_call * 1e6:.1f} us per call < 1 ms", per_call < 1e-3))
    return checks


@criterion(2, "critical-curve asymptotics", budget=1.0)
def test_criterion_02_asymptotics():
    lr_big = radial_critical_lambda(1e3)
    lr_small = radial_critical_lambda(1e-3)
    la_inf = axial_critical_lambda(math.inf)
    la_small = axial_critical_lambda(1e-3)
    lin = 2e-3 / math.e
    return [
        (f"|lambda_c(1e3)-2|/2 = {abs(lr_big - 2) / 2:.2e} < 1%", abs(lr_big - 2) / 2 < 0.01),
        (f"lambda_c(1e-3) ratio-1 = {abs(lr_small / lin - 1):.2e} < 1%", abs(lr_small / lin - 1) < 0.01),
        (f"|Lambda_c(inf)-8| = {abs(la_inf - 8):.1e} < 1e-8", abs(la_inf - 8) < 1e-8),
        (f"Lambda_c(1e-3) ratio-1 = {abs(la_small / lin - 1):.2e} < 1%", abs(la_small / lin - 1) < 0.01),
    ]


def fd_weights(offsets, order):
    """Finite-difference weights for derivative ``order`` at 0 on unit spacing."""
    offsets = np.asarray(offsets, dtype=float)
    k = np.arange(len(offsets))
    vander = offsets[None, :] ** k[:, None] / np.array([math.factorial(j) for j in k])[:, None]
    rhs = np.zeros(len(offsets))
    rhs[order] = 1.0
    return np.linalg.solve(vander, rhs)


C2, C1 = fd_weights(range(-2, 3), 2), fd_weights(range(-2, 3), 1)
EDGE2 = {j: fd_weights(np.arange(6) - j, 2) for j in (0, 1)}  # node j from the end, stencil inward
EDGE1 = {j: fd_weights(np.arange(6) - j, 1) for j in (0, 1)}


def derivatives(y, h, even_left=False):
    """Fourth-order first and second derivatives on a uniform grid.

    With ``even_left`` the profile is reflected evenly through the first node
    (the symmetry axis); otherwise both ends use one-sided stencils."""
    n = len(y)
    pad = np.concatenate([y[2:0:-1], y]) if even_left else np.concatenate([[np.nan, np.nan], y])
    pad = np.concatenate([pad, [np.nan, np.nan]])
    d1 = sum(c * pad[2 + o : 2 + o + n] for o, c in zip(range(-2, 3), C1)) / h
    d2 = sum(c * pad[2 + o : 2 + o + n] for o, c in zip(range(-2, 3), C2)) / h**2
    for j in (0, 1):
        if not even_left:
            d1[j] = EDGE1[j] @ y[:6] / h
            d2[j] = EDGE2[j] @ y[:6] / h**2
        d1[n - 1 - j] = -EDGE1[j] @ y[::-1][:6] / h
        d2[n - 1 - j] = EDGE2[j] @ y[::-1][:6] / h**2
    assert np.all(np.isfinite(d1)) and np.all(np.isfinite(d2))
    return d1, d2


def radial_residual(theta, r, amp, beta):
    h = r[1] - r[0]
    d1, d2 = derivatives(theta, h, even_left=True)
    lap = np.empty_like(theta)
    lap[0] = 2.0 * d2[0]  # theta_rr + theta_r / r on the axis
    lap[1:] = d2[1:] + d1[1:] / r[1:]
    pde = np.max(np.abs(lap[:-1] + amp * np.exp(theta[:-1])))
    robin = abs(d1[-1] + beta * theta[-1])
    return max(pde, robin)


def axial_residual(theta, z, amp, alpha):
    h = z[1] - z[0]
    d1, d2 = derivatives(theta, h)
    pde = np.max(np.abs(d2[1:-1] + amp * np.exp(-theta[1:-1])))
    robin = max(abs(d1[0] - alpha * theta[0]), abs(d1[-1] + alpha * theta[-1]))
    return max(pde, robin)


@criterion(3, "exact steady states solve a 512-cell discretization", budget=5.0)
def test_criterion_03_residuals():
    # an independent fourth-order discretization: the solver's own second-order
    # operator carries an O(h^2) truncation term of the same size as the bound
    n = 512
    rng = np.random.default_rng(20240601)
    r = np.linspace(0.0, 1.0, n + 1)
    z = np.linspace(-0.5, 0.5, n + 1)
    worst = {"radial V": 0.0, "radial I": 0.0, "axial V": 0.0, "axial I": 0.0}
    for _ in range(20):
        beta = 10 ** rng.uniform(math.log10(0.05), math.log10(5.0))
        lam = rng.uniform(0.05, 0.95) * radial_critical_lambda(beta)
        th = evaluate_profile(radial_steady_voltage(lam, beta)[0], r)
        worst["radial V"] = max(worst["radial V"], radial_residual(th, r, lam, beta))

        beta = 10 ** rng.uniform(math.log10(0.05), math.log10(5.0))
        forcing = 10 ** rng.uniform(-1.0, 2.0)
        th = evaluate_profile(radial_steady_current(forcing, beta), r)
        J = simpson(np.exp(th) * r, x=r)
        worst["radial I"] = max(worst["radial I"], radial_residual(th, r, forcing / (4.0 * J * J), beta))

        alpha = 10 ** rng.uniform(-1.0, 1.0)
        Lam = rng.uniform(0.05, 0.95) * axial_critical_lambda(alpha)
        th = evaluate_profile(axial_steady_voltage(Lam, alpha)[0], z)
        K = simpson(np.exp(-th), x=z)
        worst["axial V"] = max(worst["axial V"], axial_residual(th, z, Lam / (K * K), alpha))

        alpha = 10 ** rng.uniform(-1.0, 1.0)
        forcing = 10 ** rng.uniform(-1.0, 2.0)
        th = evaluate_profile(axial_steady_current(forcing, alpha), z)
        worst["axial I"] = max(worst["axial I"], axial_residual(th, z, forcing, alpha))
    checks = [(f"{k} max residual {v:.2e} < 1e-5", v < 1e-5) for k, v in worst.items()]
    # control: the same check rejects a profile whose forcing is off by 1%
    th = evaluate_profile(radial_steady_voltage(0.05, 0.126)[0], r)
    off = radial_residual(th, r, 0.0505, 0.126)
    checks.append((f"1% forcing error gives residual {off:.1e} > 1e-4", off > 1e-4))
    return checks


@criterion(4, "transient-to-steady convergence and second-order meshes", budget=30.0)
def test_criterion_04_convergence():
    checks = []
    opts = SolverOptions(t_end=50.0)
    # radial: lambda = 0.05 below lambda_c(0.126) = 0.0900
    g = DimensionlessGroups(delta=0.15, lambda_=0.05, beta=0.126, alpha=0.037, curlyI=math.inf, nu=0.0)
    exact = radial_steady_voltage(0.05, 0.126)[0]
    finals = {}
    for n in (32, 64, 128):
        res = solve_radial(g, VOLT, SpatialGrid(n, Geometry.RADIAL), opts)
        finals[n] = res.final_state
    gap = max_gap(finals[128], evaluate_profile(exact, np.linspace(0, 1, 129)))
    ratio = max_gap(finals[32], finals[64][::2]) / max_gap(finals[64], finals[128][::2])
    checks += [(f"radial gap {gap:.2e} < 1e-3", gap < 1e-3), (f"radial mesh ratio {ratio:.2f} >= 3.5", ratio >= 3.5)]
    # axial: delta = 0.5 so the axial diffusion settles by t = 50
    alpha, Lam = 1.0, 0.5 * axial_critical_lambda(1.0)
    g = DimensionlessGroups(delta=0.5, lambda_=Lam * 0.25, beta=0.126, alpha=alpha, curlyI=math.inf, nu=0.0)
    exact = axial_steady_voltage(Lam, alpha)[0]
    for n in (32, 64, 128):
        finals[n] = solve_axial(g, VOLT, SpatialGrid(n, Geometry.AXIAL), opts).final_state
    gap = max_gap(finals[128], evaluate_profile(exact, np.linspace(-0.5, 0.5, 129)))
    ratio = max_gap(finals[32], finals[64][::2]) / max_gap(finals[64], finals[128][::2])
    checks += [(f"axial gap {gap:.2e} < 1e-3", gap < 1e-3), (f"axial mesh ratio {ratio:.2f} >= 3.5", ratio >= 3.5)]
    return checks


@criterion(5, "flash trajectory with the reference groups", budget=60.0)
def test_criterion_05_flash_trajectory():
    lam, beta, curlyI = 0.104, 0.126, 284.0
    grid = SpatialGrid(64, Geometry.RADIAL)
    g = DimensionlessGroups(delta=0.15, lambda_=lam, beta=beta, alpha=0.037, curlyI=curlyI, nu=0.0)
    res = solve_radial(g, ControlSchedule(current_limit=curlyI), grid, SolverOptions(t_end=200.0))
    k = res.control_mode.index("current")
    monotone = bool(np.all(np.diff(res.I) >= -1e-9 * curlyI))
    one_way = set(res.control_mode[k:]) == {"current"} and set(res.control_mode[:k]) == {"voltage"}
    reached = abs(res.I[k] - curlyI) < 1e-9 * curlyI
    exact = evaluate_profile(radial_steady_current(lam * curlyI**2, beta), res.coords)
    gap = max_gap(res.final_state, exact)

    blow = solve_radial(g.with_(curlyI=math.inf), VOLT, grid, SolverOptions(t_end=200.0))
    t_b = blow.blowup.t_estimate if blow.blew_up else math.nan

    # the three representative side-cooling values: only the two below the fold flash
    flashes = {}
    for b in (0.05, 0.126, 0.3):
        r = solve_radial(g.with_(beta=b), ControlSchedule(current_limit=curlyI), SpatialGrid(32, Geometry.RADIAL),
                         SolverOptions(t_end=200.0))
        flashes[b] = r.switch_time is not None
    return [
        (f"I monotone and reaches {curlyI:g} at t = {res.switch_time:.4g}", monotone and reached),
        ("one-way switch", one_way),
        (f"gap to current-controlled steady state {gap:.2e} < 1e-3", gap < 1e-3),
        (f"unlimited current blows up at t = {t_b:.4g}", blow.blew_up and math.isfinite(t_b)),
        (f"flash for beta in {{0.05, 0.126}}, none for 0.3: {flashes}", flashes == {0.05: True, 0.126: True, 0.3: False}),
    ]


@criterion(6, "lumped closed form -ln(1 - lambda t)", budget=1.0)
def test_criterion_06_lumped_oracle():
    lam = 0.104
    g = DimensionlessGroups(delta=0.15, lambda_=lam, beta=0.0, alpha=0.0, curlyI=math.inf, nu=0.0)
    res = solve_lumped(g, VOLT, SolverOptions(t_end=20.0))
    ok = res.theta_max <= 20.0
    err = max_gap(res.theta_max[ok], -np.log1p(-lam * res.times[ok]))
    # large steps skip the last stretch, so also stop exactly where theta = 1, ..., 20
    tops = []
    for k in range(1, 21):
        t_k = -math.expm1(-k) / lam
        end = solve_lumped(g, VOLT, SolverOptions(t_end=t_k))
        assert not end.blew_up and end.times[-1] == t_k
        err = max(err, abs(end.theta_max[-1] - -math.log1p(-lam * t_k)))
        tops.append(end.theta_max[-1])
    top = float(max(tops))
    t_b = res.blowup.t_estimate if res.blew_up else math.nan
    rel = abs(t_b * lam - 1.0)
    return [
        (f"max error {err:.2e} < 1e-6 up to theta = {top:.2f}", err < 1e-6 and top > 19.0),
        (f"blow-up time {t_b:.6f} vs 1/lambda = {1 / lam:.6f} ({rel:.1e})", rel < 1e-3),
    ]


@criterion(7, "lumped tangency criterion brackets transient blow-up", budget=30.0)
def test_criterion_07_tangency():
    rng = np.random.default_rng(7)
    misses = []
    for _ in range(50):
        while True:
            beta, delta = rng.uniform(0.002, 0.045), rng.uniform(0.05, 0.3)
            alpha = rng.uniform(0.0, (0.05 - beta) / delta**2)
            s = beta + delta**2 * alpha
            if s < 0.05:
                break
        base = DimensionlessGroups(delta=delta, lambda_=1.0, beta=beta, alpha=alpha, curlyI=math.inf, nu=0.0)
        lam_star = lumped_flash_criterion(base).threshold
        # the bottleneck passage near the fold takes about 16/s time units
        opts = SolverOptions(t_end=200.0 / s, dt_max=10.0 / s, rel_tol=1e-7, abs_tol=1e-12)
        below = solve_lumped(base.with_(lambda_=0.98 * lam_star), VOLT, opts)
        above = solve_lumped(base.with_(lambda_=1.02 * lam_star), VOLT, opts)
        if below.blew_up or not above.blew_up:
            misses.append((beta, alpha, delta))
    return [(f"{50 - len(misses)}/50 triples bracketed within 2%", not misses)]


@criterion(8, "current control attracts all initial conditions", budget=60.0)
def test_criterion_08_global_attraction():
    checks = []
    radial = DimensionlessGroups(delta=0.15, lambda_=0.104, beta=0.126, alpha=0.037, curlyI=284.0, nu=0.0)
    sched = ControlSchedule(mode=ControlMode.CURRENT_ONLY, current_limit=284.0)
    starts = [lambda x: 0.0 * x, lambda x: 2.0 * (1.0 - x**2), lambda x: 12.0 * (1.0 - x**2)]
    finals = [solve_radial(radial, sched, SpatialGrid(64, Geometry.RADIAL), SolverOptions(t_end=150.0),
                           initial_theta=f).final_state for f in starts]
    gap = max(max_gap(a, b) for i, a in enumerate(finals) for b in finals[i + 1:])
    checks.append((f"radial pairwise gap {gap:.2e} < 1e-3", gap < 1e-3))
    gap = max(max_gap(f, evaluate_profile(radial_steady_current(0.104 * 284.0**2, 0.126),
                                          np.linspace(0, 1, 65))) for f in finals)
    checks.append((f"radial gap to exact state {gap:.2e} < 1e-3", gap < 1e-3))

    axial = DimensionlessGroups(delta=0.5, lambda_=0.5, beta=0.126, alpha=0.5, curlyI=3.0, nu=0.0)
    sched = ControlSchedule(mode=ControlMode.CURRENT_ONLY, current_limit=3.0)
    starts = [lambda z: 0.0 * z, lambda z: 2.0 * (1.0 - 4.0 * z**2), lambda z: 10.0 * (1.0 - 4.0 * z**2)]
    finals = [solve_axial(axial, sched, SpatialGrid(64, Geometry.AXIAL), SolverOptions(t_end=60.0),
                          initial_theta=f).final_state for f in starts]
    gap = max(max_gap(a, b) for i, a in enumerate(finals) for b in finals[i + 1:])
    checks.append((f"axial pairwise gap {gap:.2e} < 1e-3", gap < 1e-3))
    gap = max(max_gap(f, evaluate_profile(axial_steady_current((0.5 / 0.5**2) * 3.0**2, 0.5),
                                          np.linspace(-0.5, 0.5, 65))) for f in finals)
    checks.append((f"axial gap to exact state {gap:.2e} < 1e-3", gap < 1e-3))
    return checks


@criterion(9, "high-aspect limits", budget=60.0)
def test_criterion_09_high_aspect():
    checks = []
    for alpha in (0.1, 1.0, 10.0):
        v0, ref = high_aspect_critical(alpha, 0.0), axial_critical_lambda(alpha)
        rel = abs(v0 / ref - 1)
        checks.append((f"B=0, alpha={alpha:g}: {rel:.1e} < 0.1%", rel < 1e-3))
        v = high_aspect_critical(alpha, 1e3)
        rel = abs(v / (1e3 / math.e) - 1)
        checks.append((f"B=1e3, alpha={alpha:g}: {rel:.2%} < 5% of B/e", rel < 0.05))
    return checks


@criterion(10, "regime diagram", budget=10.0)
def test_criterion_10_regime():
    p = DimensionalParameters.table1()
    e_star = critical_field(p, 1110.0)
    ref = 3e4 * math.sqrt(radial_critical_lambda(0.126) / 0.104)
    rel = abs(e_star / ref - 1)
    op = flash_condition(p, 1110.0, p.V0 / p.length_L)
    grid = regime_diagram(p, (900.0, 1400.0), (1e3, 1e6), (101, 50), spacing="log")
    decreasing = bool(np.all(np.diff(grid.boundary) < 0))
    return [
        (f"E*(1110 K) = {e_star:.5g} V/m vs {ref:.5g} ({rel:.2%}) < 0.5%", rel < 5e-3),
        ("reference operating point is flash", op.flash),
        ("E*(T) strictly decreasing on [900, 1400] K", decreasing),
    ]


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failures = 0
    for t in tests:
        try:
            t()
        except Exception:
            failures += 1
    sys.exit(1 if failures else 0)
