"""Named scenarios: each runs module operations and returns checked claims.

A scenario is split into independent tasks (usually one per decay rate);
tasks run serially or on a process pool and their claims are concatenated
in task order, so the report does not depend on ``jobs``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import compactification as cpt
from . import einstein as ein
from . import metrics as M
from . import models as mod
from . import riccati as ric
from .config import ScenarioConfig
from .errors import ClassificationMismatch, ConfigurationError, NotEinsteinError
from .fitting import fit_decay
from .grid import FermiGrid
from .report import Claim, bound_claim, flag_claim, rate_claim


def _tag(**kw):
    return ",".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}" for k, v in kw.items())


def _y0(n, y=None):
    return np.asarray(y if y is not None else 0.3 + 0.4 * np.arange(n), dtype=float)[:n]


# -- scalar Riccati -------------------------------------------------------------


def scalar_case(a, J, lambda0, r_max, step, window, tol):
    res = ric.integrate_scalar_riccati(
        lambda r: 1.0 + J * math.exp(-a * r), lambda0, r_max,
        deviation=lambda r: J * math.exp(-a * r), rate=a, step=step,
    )
    r, dev = res.r_samples, res.abs_deviation
    fit = fit_decay(r, dev, window)
    tag = _tag(a=a, lambda0=lambda0)
    if a < 2:
        return [rate_claim(f"scalar-rate[{tag}]", "scalar Riccati: deviation decays at rate a below 2",
                           a, fit.exponent, tol)]
    if a > 2:
        return [rate_claim(f"scalar-rate[{tag}]", "scalar Riccati: rate saturates at 2 above 2",
                           2.0, fit.exponent, tol)]
    m = (r >= window[0]) & (r <= window[1])
    q = dev[m] * np.exp(2 * r[m]) / (r[m] + 1.0)
    half = q.size // 2
    growth = float(q[half:].max() / q[:half].max())
    return [
        flag_claim(f"scalar-log[{tag}]", "scalar Riccati: critical rate 2 carries an (r+1) factor",
                   True, fit.log_correction),
        rate_claim(f"scalar-rate[{tag}]", "scalar Riccati: critical rate 2 exponent", 2.0, fit.exponent, tol),
        bound_claim(f"scalar-bounded[{tag}]",
                    "scalar Riccati: |lambda-1| e^{2r}/(r+1) bounded (late/early sup ratio)",
                    growth, 1.5),
    ]


def _scalar_tasks(cfg: ScenarioConfig):
    tol = cfg.param("tolerance", 0.1)
    lambdas = cfg.param("lambda0", [0.5, 2.0, 5.0])
    return [(scalar_case, (a, cfg.J, float(l0), cfg.r_max, cfg.step, cfg.window, tol))
            for a in cfg.a_values for l0 in lambdas]


# -- comparison -----------------------------------------------------------------


def comparison_case(a, n, J, anisotropy, modulation, s0, ny, r_max, step, window, tol, band_ratio):
    prof = ric.anisotropic_profile(n, a, J, anisotropy, modulation)
    y = _y0(n)[None, :] + np.linspace(0.0, 1.0, ny)[:, None] * np.eye(n)[0]
    tr = ric.integrate_riccati_system(prof, s0 * np.eye(n), np.eye(n), y_patch=y, r_max=r_max, step=step)
    dev = np.abs(tr.shape_eigenvalue_deviation()).max(axis=(0, 2))
    fit = fit_decay(tr.r_samples, dev, window)
    L1, L2 = tr.metric_band()
    tag = _tag(a=a, n=n)
    return [
        rate_claim(f"comparison-shape-rate[{tag}]", "comparison: eigenvalues of S approach 1 at rate a",
                   a, fit.exponent, tol),
        bound_claim(f"comparison-metric-band[{tag}]", "comparison: e^{-2r} g stays in a fixed band (L2/L1)",
                    L2 / L1, band_ratio),
    ]


def exact_flow_case(n, R0, r_max, tol):
    tr = ric.integrate_riccati_system(ric.isotropic_profile(n, 1.0, 0.0), np.eye(n) / math.tanh(R0),
                                      math.sinh(R0) ** 2 * np.eye(n), r_max=r_max)
    r = tr.r_samples
    s_err = float(np.max(np.abs(tr.S_series[0] * np.tanh(r + R0)[:, None, None] - np.eye(n))))
    g_err = float(np.max(np.abs(tr.g_series[0] / np.sinh(r + R0)[:, None, None] ** 2 - np.eye(n))))
    res = ric.integrate_scalar_riccati(lambda t: 1.0, 2.0, r_max, deviation=lambda t: 0.0)
    exact = 1.0 / np.tanh(res.r_samples + 0.5 * math.log(3.0))
    l_err = float(np.max(np.abs(res.lambda_samples / exact - 1.0)))
    tag = _tag(R=R0)
    return [
        bound_claim(f"exact-hyperbolic-S[{tag}]", "exact solution: S = coth(r+R) I (relative error)", s_err, tol),
        bound_claim(f"exact-hyperbolic-g[{tag}]", "exact solution: g = sinh^2(r+R) (relative error)", g_err, tol),
        bound_claim("exact-scalar-coth", "exact solution: lambda = coth(r + ln(3)/2) (relative error)",
                    l_err, tol),
    ]


def _comparison_tasks(cfg: ScenarioConfig):
    tasks = [(comparison_case, (a, cfg.n, cfg.J, cfg.anisotropy, cfg.modulation, cfg.param("s0", 1.3),
                                cfg.y_resolution, cfg.r_max, cfg.step, cfg.window,
                                cfg.param("tolerance", 0.1), cfg.param("band_ratio", 10.0)))
             for a in cfg.a_values]
    tasks.append((exact_flow_case, (cfg.n, cfg.param("R", 1.0), min(cfg.r_max, 20.0),
                                    cfg.param("exact_tolerance", 1e-8))))
    return tasks


# -- derivative systems ---------------------------------------------------------


def _rate_flow(a, n, J, mode, seed, s0, r_max, step, order):
    prof = ric.rate_profile(n, a, J, source_mode=mode, seed=seed)
    S0, g0 = s0 * np.eye(n), np.eye(n)
    base = ric.integrate_riccati_system(prof, S0, g0, y_patch=_y0(n)[None], r_max=r_max, step=step)
    if order == 1:
        return prof, ric.integrate_first_derivative_system(base, prof, S0, g0)
    return prof, ric.integrate_second_derivative_system(base, prof, S0, g0, allow_below_threshold=True)


def first_derivative_case(a, n, J, mode, seed, s0, r_max, step, window, tol, tol_w, dominate):
    prof, tr = _rate_flow(a, n, J, mode, seed, s0, r_max, step, 1)
    r = tr.r_samples
    fg = fit_decay(r, tr.norm_dgbar()[0], window)
    fw = fit_decay(r, tr.norm_dW()[0], window)
    tag = _tag(a=a, mode=mode)
    out = []
    if a < 1:
        out.append(rate_claim(f"dgbar-rate[{tag}]", "first derivatives: |d gbar| grows at rate 1-a",
                              1.0 - a, fg.growth, tol))
    elif a == 1:
        out.append(flag_claim(f"dgbar-log[{tag}]", "first derivatives: |d gbar| = O(r) at a = 1",
                              True, fg.log_correction))
    else:
        out.append(bound_claim(f"dgbar-bounded[{tag}]", "first derivatives: |d gbar| bounded for a > 1 (|rate|)",
                               abs(fg.growth), 0.05))
    if a != 1:
        out.append(rate_claim(f"dW-rate[{tag}]", "first derivatives: |dW| grows at rate 3-a",
                              3.0 - a, fw.growth, tol_w))
    if dominate:
        dom, _ = ric.dominate_first_derivatives(tr, prof)
        out.append(flag_claim(f"domination[{tag}]",
                              "comparison principle: (|dW|, |d gbar|) strictly below the model (u, v)",
                              True, dom.dominated))
    return out


def fd_crosscheck_case(n, a, s0, tol):
    prof = ric.anisotropic_profile(n, a)
    S0, g0 = s0 * np.eye(n), np.eye(n)
    y = _y0(n)
    base = ric.integrate_riccati_system(prof, S0, g0, y_patch=y[None], r_max=10.0)
    tr = ric.integrate_first_derivative_system(base, prof, S0, g0, rtol=1e-12, atol=1e-14)
    _, dS, dg = ric.finite_difference_derivatives(prof, S0, g0, y, h=1e-3, r_max=10.0)
    err = max(np.max(np.abs(tr.dS_series[0] - dS)) / np.max(np.abs(dS)),
              np.max(np.abs(tr.dgbar_series[0] - dg)) / np.max(np.abs(dg)))
    return [bound_claim(f"fd-crosscheck[{_tag(a=a)}]",
                        "first derivatives: co-integrated system matches geodesic differences",
                        float(err), tol)]


def _first_tasks(cfg: ScenarioConfig):
    mode = cfg.param("source_mode", "full")
    dom = set(cfg.param("domination_a", [0.5, 1.5]))
    tasks = [(first_derivative_case, (a, cfg.n, cfg.J, mode, cfg.seed, cfg.param("s0", 1.2), cfg.r_max,
                                      cfg.step, cfg.window, cfg.param("tolerance", 0.1),
                                      cfg.param("tolerance_dW", 0.15), a in dom))
             for a in cfg.a_values]
    if cfg.param("fd_crosscheck", True):
        tasks.append((fd_crosscheck_case, (cfg.n, 0.8, cfg.param("s0", 1.2), 1e-4)))
    return tasks


def second_derivative_case(a, n, J, mode, seed, s0, r_max, step, window, tol):
    _, tr = _rate_flow(a, n, J, mode, seed, s0, r_max, step, 2)
    f2 = fit_decay(tr.r_samples, tr.norm_d2gbar()[0], window)
    tag = _tag(a=a, mode=mode)
    if a == 2:
        return [flag_claim(f"d2gbar-log[{tag}]", "second derivatives: |d^2 gbar| = O(r) at a = 2",
                           True, f2.log_correction)]
    if 1 < a < 2:
        return [rate_claim(f"d2gbar-rate[{tag}]", "second derivatives: |d^2 gbar| grows at rate 2-a",
                           2.0 - a, f2.growth, tol)]
    return [bound_claim(f"d2gbar-bounded[{tag}]", "second derivatives: |d^2 gbar| bounded for a > 2",
                        abs(f2.growth), tol)]


def _second_tasks(cfg: ScenarioConfig):
    mode = cfg.param("source_mode", "full")
    for a in cfg.a_values:
        if a <= 1:
            raise ConfigurationError("second-derivative rates need a > 1")
    return [(second_derivative_case, (a, cfg.n, cfg.J, mode, cfg.seed, cfg.param("s0", 1.2), cfg.r_max,
                                      cfg.step, cfg.window, cfg.param("tolerance", 0.1)))
            for a in cfg.a_values]


# -- model systems --------------------------------------------------------------


def model_case(a, b, seed, r_max, window, tol, tol_w, wronskian):
    p = mod.ModelParams.first_model(a) if b == 0 else mod.ModelParams.second_model(a)
    red = mod.reduce_to_second_order(p)
    tag = _tag(a=a, b=b)
    out = []
    for which, expected in (("u", tuple(sorted((0.0, 2.0 - a)))), ("v", (-2.0, 0.0))):
        got = tuple(float(x) for x in red[which].roots)
        err = max(abs(g - e) for g, e in zip(got, expected))
        out.append(Claim(f"roots-{which}[{tag}]", "model systems: characteristic roots of the reduced equation",
                         expected, got, 1e-12, err <= 1e-12))
    sol = mod.integrate_model_system(p, 1.0, 1.0, r_max=r_max)
    out.append(bound_claim(f"reduction-residual[{tag}]", "model systems: solutions satisfy the reductions",
                           sol.reduction_residual(), 1e-6))
    rates = mod.measure_model_rates(p, seed=seed, r_max=r_max, window=window, tolerance=tol)
    for which, rc in rates.items():
        out.append(Claim(f"model-rate-{which}[{tag}]", "model systems: growth table of u and v",
                         rc.predicted.describe(), f"{rc.measured.describe()} (exponent {rc.measured_exponent:.4f})",
                         tol, rc.passed))
    if wronskian:
        for which in ("u", "v"):
            f = red[which]
            w = mod.wronskian_growth(mod.AsymptoticEquation(f.c1, f.c2, a), seed=seed)
            out.append(rate_claim(f"wronskian-{which}[{tag}]", "model systems: Wronskian grows at mu1 + mu2",
                                  float(sum(f.roots)), w, tol_w))
    return out


def _model_tasks(cfg: ScenarioConfig):
    bs = cfg.param("b", [0, 1])
    return [(model_case, (a, int(b), cfg.seed, cfg.r_max, cfg.window, cfg.param("tolerance", 0.1),
                          cfg.param("tolerance_wronskian", 0.05), int(b) == bs[0]))
            for b in bs for a in cfg.a_values]


ASYMPTOTIC_SUITE = (
    # (label, c1, c2, a, omega, b1, b2, b3)
    ("distinct-resonant-source", -1.0, 0.0, 1.0, -1.0, "zero", "zero", "one"),
    ("distinct-decaying", 2.0, 0.0, 1.0, -math.inf, "zero", "zero", "zero"),
    ("distinct-source-between-roots", -1.5, 0.0, 1.0, 0.5, None, None, None),
    ("distinct-source-equal-root", -1.5, 0.0, 1.0, 1.5, None, None, None),
    ("distinct-source-dominant", -1.5, 0.0, 1.0, 2.5, None, None, None),
    ("distinct-negative-roots", 2.0, 0.0, 1.0, -1.0, None, None, None),
    ("repeated-constant-source", 0.0, 0.0, 1.0, 0.0, "one", "zero", "one"),
    ("repeated-decaying-source", 0.0, 0.0, 1.0, -1.0, None, None, None),
    ("repeated-growing-source", 0.0, 0.0, 1.0, 0.5, None, None, None),
)


def asymptotic_case(label, c1, c2, a, omega, b1, b2, b3, seed, tol):
    fns = {"zero": mod.zero, "one": mod.one, None: None}
    eq = mod.AsymptoticEquation(c1, c2, a, omega, fns[b1], fns[b2], fns[b3])
    v = mod.verify_asymptotic_theorem(eq, seed=seed, tolerance=tol)
    if v.measured_power is not None:
        meas = f"power {v.measured_power:.4f}"
    else:
        meas = f"exponent {v.measured_exponent:.4f}" + (" with r factor" if v.log_correction else "")
    return [Claim(f"asymptotics[{label}]", f"asymptotic ODE theorem ({v.case} roots)",
                  v.predicted.describe(), meas, tol, v.passed)]


def _asymptotic_tasks(cfg: ScenarioConfig):
    names = cfg.param("cases")
    suite = [c for c in ASYMPTOTIC_SUITE if names is None or c[0] in names]
    return [(asymptotic_case, c + (cfg.seed, cfg.param("tolerance", 0.05))) for c in suite]


# -- compactification -----------------------------------------------------------


def planted_holder_case(alpha, ny, levels, tol):
    y = np.linspace(0.0, 2 * np.pi, ny, endpoint=False)
    rho = 0.5 * 2.0 ** -np.arange(levels)
    F = np.tile(rho ** alpha, (ny, 1)) + 0.1 * np.sin(y)[:, None]
    rep = cpt.estimate_holder_exponent(F, y, rho)
    return [rate_claim(f"holder-planted[{_tag(alpha=alpha)}]", "Hölder estimator: planted exponent",
                       alpha, rep.exponent_estimate, tol)]


def classification_case(a, n, J, seed, s0, r_max, step, window):
    _, tr = _rate_flow(a, n, J, "full", seed, s0, r_max, step, 2)
    r = tr.r_samples
    f1 = fit_decay(r, tr.norm_dgbar()[0], window)
    f2 = fit_decay(r, tr.norm_d2gbar()[0], window)
    expected = cpt.theorem_class(a, second_order=True)
    try:
        got = cpt.classify_regularity(f1, f2, a).label
    except ClassificationMismatch as exc:
        got = f"mismatch: {exc}"
    return [Claim(f"regularity-class[{_tag(a=a)}]", "regularity table of the compactified metric",
                  expected.label, got, "exact", got == expected.label)]


def holder_flow_case(a, n, ny, seed, r_max, step, tol):
    prof = ric.anisotropic_profile(n, a)
    y = _y0(n)[None, :] + np.linspace(0.0, 1.0, ny)[:, None] * np.eye(n)[0]
    tr = ric.integrate_riccati_system(prof, 1.2 * np.eye(n), np.eye(n), y_patch=y, r_max=r_max, step=step)
    cg = cpt.compactify(tr)
    rep = cpt.estimate_holder_exponent(cg.gbar_components[:, :, 0, 0], y, cg.rho_nodes, a=a, seed=seed)
    tag = _tag(a=a)
    return [
        Claim(f"holder-flow-class[{tag}]", "Hölder class of the compactified metric from samples",
              rep.predicted_class.label, rep.measured_class.label, "exact", bool(rep.agreement_flag)),
        rate_claim(f"holder-flow-exponent[{tag}]", "Hölder exponent of the compactified metric from samples",
                   min(a, 1.0), rep.exponent_estimate, tol),
    ]


def sphere_factor_case(n, R0, r_max, tol):
    tr = ric.integrate_riccati_system(ric.isotropic_profile(n, 1.0, 0.0), np.eye(n) / math.tanh(R0),
                                      math.sinh(R0) ** 2 * np.eye(n), r_max=r_max)
    cg = cpt.compactify(tr)
    rho = cg.rho_nodes
    exact = 0.25 * (math.exp(R0) - rho ** 2 * math.exp(-R0)) ** 2
    err = float(np.max(np.abs(cg.gbar_components[0, :, 0, 0] / exact - 1.0)))
    return [bound_claim(f"sphere-factor[{_tag(R=R0)}]",
                        "exact compactification: factor (e^R - rho^2 e^-R)^2 / 4 (relative error)", err, tol)]


def _compactify_tasks(cfg: ScenarioConfig):
    tasks = [(planted_holder_case, (float(al), 16, 64, cfg.param("tolerance_holder", 0.05)))
             for al in cfg.param("planted", [0.25, 0.5, 0.75])]
    tasks += [(classification_case, (a, cfg.n, cfg.J, cfg.seed, cfg.param("s0", 1.2), cfg.r_max, cfg.step,
                                     cfg.window)) for a in cfg.a_values]
    tasks += [(holder_flow_case, (float(a), cfg.n, cfg.y_resolution, cfg.seed, cfg.r_max, cfg.step,
                                  cfg.param("tolerance_holder", 0.05)))
              for a in cfg.param("holder_flow_a", [0.5])]
    tasks.append((sphere_factor_case, (cfg.n, cfg.param("R", 0.7), min(cfg.r_max, 20.0),
                                       cfg.param("exact_tolerance", 1e-10))))
    return tasks


# -- curvature identities -------------------------------------------------------


def laplacian_riemann_case(seed, spacings, order_min):
    met = M.random_analytic(3, seed)
    res, order = ein.laplacian_riemann_convergence(met, [1.0, 0.3, 0.2, 0.1], spacings)
    return [bound_claim(f"lapl-riemann-order[{_tag(seed=seed)}]",
                        "Laplacian of curvature identity: residual convergence order (random analytic, dim 4)",
                        order, order_min, below=False)]


def laplacian_riemann_examples(h):
    out = []
    res, _ = ein.laplacian_riemann_convergence(M.perturbed_sinh(3), [1.0, 0.3, 0.2, 0.1], (2 * h, h))
    ratio = res[0].residual_norm / res[1].residual_norm
    out.append(bound_claim("lapl-riemann-halving[perturbed-sinh]",
                           "Laplacian of curvature identity: residual ratio under halving", ratio, 3.6,
                           below=False))
    g = FermiGrid.patch(M.flat_cylinder(3), [1.0, 0.3, 0.2, 0.1], h, ein.required_half_width())
    flat = ein.laplacian_riemann_residual(g, g.center_node())
    out.append(bound_claim("lapl-riemann-flat", "Laplacian of curvature identity: flat cylinder (both sides)",
                           max(flat.lhs_norm, flat.rhs_norm), 1e-10))
    return out


def weyl_identity_case(h, bound, cert_bound):
    met = M.hyperbolic_comparison(3)
    c = [1.0, 1.2, 0.7, 0.4]
    g = FermiGrid.patch(met, c, h, ein.required_half_width(6, 6))
    out = []
    for label, method, orders in (("closed", "closed", (4, 2)), ("fd6", "fd", (6, 6))):
        res = ein.weyl_laplacian_residual(g, g.center_node(), *orders, method=method)
        out.append(bound_claim(f"weyl-identity-hyperbolic[{label}]",
                               "Laplacian of Weyl identity: hyperbolic space, max of both sides",
                               max(res.lhs_norm, res.rhs_norm), bound))
        out.append(bound_claim(f"einstein-certificate-hyperbolic[{label}]",
                               "Einstein certification: |Ric + n g| on hyperbolic space", res.einstein_defect,
                               cert_bound))
    return out


def weyl_identity_einstein_case(spacings, order_min):
    met = M.einstein_sphere_product()
    c = [1.0, 1.2, 0.7, 1.1, 0.5]
    res = []
    for h in spacings:
        g = FermiGrid.patch(met, c, h, 2)
        res.append(ein.weyl_laplacian_residual(g, g.center_node()))
    order = ein.convergence_order(spacings, [x.residual_norm for x in res])
    out = [bound_claim("weyl-identity-order[einstein-product]",
                       "Laplacian of Weyl identity: residual convergence order (nonflat Einstein, dim 5)",
                       order, order_min, below=False)]
    g = FermiGrid.patch(M.random_analytic(3, 0), [1.0, 0.3, 0.2, 0.1], spacings[-1], ein.required_half_width())
    try:
        ein.weyl_laplacian_residual(g, g.center_node(), method="fd")
        raised = False
    except NotEinsteinError:
        raised = True
    out.append(flag_claim("einstein-certificate-rejects[random-analytic]",
                          "Einstein certification rejects a non-Einstein metric", True, raised))
    return out


def _einstein_tasks(cfg: ScenarioConfig):
    spacings = tuple(cfg.param("spacings", [0.02, 0.01, 0.005]))
    tasks = [(laplacian_riemann_case, (cfg.seed + k, spacings, cfg.param("order_min", 1.8)))
             for k in range(cfg.param("random_metrics", 3))]
    tasks.append((laplacian_riemann_examples, (spacings[1],)))
    tasks.append((weyl_identity_case, (cfg.param("weyl_h", 0.01), cfg.param("weyl_bound", 1e-6),
                                       cfg.param("certificate_bound", 1e-8))))
    tasks.append((weyl_identity_einstein_case, ((0.04, 0.02, 0.01), cfg.param("order_min", 1.8))))
    return tasks


def weyl_decay_case(r_lo, r_hi, step, h, tol, max_order):
    r = np.round(np.arange(r_lo, r_hi + 0.5 * step, step), 10)
    rep = ein.weyl_derivative_decay(M.einstein_sphere_product(), [1.2, 0.7, 1.1, 0.5], r, a=2.0,
                                    max_order=max_order, h=h)
    return [rate_claim(f"weyl-decay[order={j}]", "Weyl decay: |nabla^j W| decays at the rate of |R + K|",
                       2.0, rep.fits[j].exponent, tol) for j in range(max_order + 1)]


def weyl_control_case(r_lo, r_hi, step, h, margin):
    r = np.round(np.arange(r_lo, r_hi + 0.5 * step, step), 10)
    rep = ein.weyl_derivative_decay(M.oscillating_warped(3), [0.3, 0.2, 0.1], r, a=1.0, max_order=1,
                                    tensor="riemann", h=h)
    gap = rep.ah0_fit.exponent - rep.fits[1].exponent
    return [bound_claim("weyl-decay-control[oscillating]",
                        "negative control: |nabla R| decays slower than |R + K| (rate gap)", gap, margin,
                        below=False)]


def weyl_hyperbolic_case(r_lo, r_hi, step, h):
    r = np.round(np.arange(r_lo, r_hi + 0.5 * step, step), 10)
    rep = ein.weyl_derivative_decay(M.hyperbolic_comparison(3), [1.2, 0.7, 0.4], r, a=2.0, max_order=2, h=h)
    zero = all(f.is_zero for f in rep.fits)
    return [flag_claim("weyl-decay-hyperbolic", "hyperbolic space: all Weyl derivative norms vanish", True, zero)]


def _weyl_tasks(cfg: ScenarioConfig):
    lo, hi = cfg.window
    h = cfg.param("h", 0.02)
    return [
        (weyl_decay_case, (lo, hi, cfg.step, h, cfg.param("tolerance", 0.15), cfg.param("max_order", 2))),
        (weyl_control_case, (lo, hi, cfg.step, h, cfg.param("control_margin", 0.1))),
        (weyl_hyperbolic_case, (lo, min(hi, lo + 2.0), cfg.step, h)),
    ]


# -- runner ---------------------------------------------------------------------

TASKS = {
    "scalar-riccati": _scalar_tasks,
    "comparison": _comparison_tasks,
    "first-derivatives": _first_tasks,
    "second-derivatives": _second_tasks,
    "model-systems": _model_tasks,
    "model-asymptotics": _asymptotic_tasks,
    "compactify-holder": _compactify_tasks,
    "einstein-identity": _einstein_tasks,
    "weyl-decay": _weyl_tasks,
}


def _call(task):
    fn, args = task
    return fn(*args)


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> list[Claim]:
    """Run every task of ``cfg.scenario`` and return the claims in task order."""
    tasks = TASKS[cfg.scenario](cfg)
    if jobs is None or jobs <= 1 or len(tasks) == 1:
        results = [_call(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_call, tasks))
    return [c for group in results for c in group]
