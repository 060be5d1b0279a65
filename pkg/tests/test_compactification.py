import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alhlab import compactification as cpt
from alhlab import riccati as ric
from alhlab.errors import ClassificationMismatch, DomainError, ResolutionError
from alhlab.fitting import DecayFit

Y16 = np.linspace(0.0, 2 * np.pi, 16, endpoint=False)
RHO64 = 0.5 * 2.0 ** -np.arange(64)


def hyperbolic_grid(n=2, R0=0.7, r_max=20.0, step=0.1, ny=1):
    y = np.zeros((ny, n)) + np.linspace(0, 1, ny)[:, None] * np.eye(n)[0]
    tr = ric.integrate_riccati_system(ric.isotropic_profile(n, 1.0, 0.0), np.eye(n) / math.tanh(R0),
                                      math.sinh(R0) ** 2 * np.eye(n), y_patch=y, r_max=r_max, step=step)
    return cpt.compactify(tr)


@pytest.mark.parametrize("R0", [0.3, 0.7, 1.5])
def test_sphere_factor_exact(R0):
    cg = hyperbolic_grid(R0=R0)
    exact = 0.25 * (math.exp(R0) - cg.rho_nodes ** 2 * math.exp(-R0)) ** 2
    assert np.max(np.abs(cg.gbar_components[0, :, 0, 0] / exact - 1.0)) <= 1e-10


def test_horospherical_compactification_is_constant():
    n = 2
    tr = ric.integrate_riccati_system(ric.isotropic_profile(n, 1.0, 0.0), np.eye(n), np.eye(n), r_max=10.0)
    cg = cpt.compactify(tr)
    assert np.all(cg.gbar_components == np.eye(n))
    assert np.all(cpt.gbar_normal_derivative(cg) == 0.0)


def test_normal_derivative_formula_matches_exact():
    R0 = 0.7
    cg = hyperbolic_grid(R0=R0, r_max=8.0)
    rho = cg.rho_nodes
    # d/drho of (e^R - rho^2 e^-R)^2 / 4
    exact = -rho * math.exp(-R0) * (math.exp(R0) - rho ** 2 * math.exp(-R0))
    d = cpt.gbar_normal_derivative(cg)
    np.testing.assert_allclose(d[:, 0, 0], exact, rtol=1e-8, atol=1e-14)
    np.testing.assert_allclose(d[:, 0, 1], 0.0, atol=1e-14)


def test_fd_normal_derivative_second_order():
    errs = []
    for step in (0.025, 0.0125):
        cg = hyperbolic_grid(r_max=4.0, step=step)
        idx, d_fd = cpt.gbar_normal_derivative_fd(cg)
        d = cpt.gbar_normal_derivative(cg, index=idx)
        errs.append(np.max(np.abs(d_fd - d)))
    assert math.log2(errs[0] / errs[1]) >= 1.9


def test_normal_derivative_singular_at_boundary():
    cg = hyperbolic_grid(r_max=2.0)
    cg = cpt.CompactifiedGrid(np.concatenate([cg.rho_nodes[:-1], [0.0]]), cg.y_nodes, cg.gbar_components,
                              cg.trajectory)
    with pytest.raises(DomainError):
        cpt.gbar_normal_derivative(cg)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_holder_planted(alpha):
    F = np.tile(RHO64 ** alpha, (16, 1)) + 0.1 * np.sin(Y16)[:, None]
    rep = cpt.estimate_holder_exponent(F, Y16, RHO64)
    assert abs(rep.exponent_estimate - alpha) <= 0.05
    assert rep.measured_class.code == "C0,a"


def test_holder_constant_is_lipschitz():
    rep = cpt.estimate_holder_exponent(np.ones((16, 64)), Y16, RHO64)
    assert rep.exponent_estimate == 1.0 and rep.measured_class.code == "C0,1"


def test_holder_rho_log_rho_is_every_exponent():
    F = np.tile(RHO64 * np.log(RHO64), (16, 1))
    rep = cpt.estimate_holder_exponent(F, Y16, RHO64)
    assert rep.measured_class.code == "C0,b-all"


def test_holder_smooth_hyperbolic_compactification():
    cg = hyperbolic_grid(r_max=20.0, ny=16)
    y = cg.y_nodes
    rep = cpt.estimate_holder_exponent(cg.gbar_components[:, :, 0, 0], y, cg.rho_nodes)
    assert rep.exponent_estimate >= 0.99


@settings(max_examples=15, deadline=None)
@given(alpha=st.sampled_from([0.3, 0.6]), amp=st.floats(1e-6, 1e-3), seed=st.integers(0, 1000))
def test_holder_estimate_not_raised_by_rough_noise(alpha, amp, seed):
    rng = np.random.default_rng(seed)
    F = np.tile(RHO64 ** alpha, (16, 1))
    clean = cpt.estimate_holder_exponent(F, Y16, RHO64).exponent_estimate
    noisy = cpt.estimate_holder_exponent(F + amp * rng.standard_normal(F.shape), Y16, RHO64).exponent_estimate
    assert noisy <= clean + 0.05


def test_holder_record_round_trip():
    F = np.tile(RHO64 ** 0.5, (16, 1))
    rep = cpt.estimate_holder_exponent(F, Y16, RHO64, a=0.5)
    back = cpt.HolderReport.from_record(rep.to_record())
    assert back == rep
    assert rep.agreement_flag is True


@pytest.mark.parametrize("F_shape,y,rho", [
    ((16, 32), Y16, RHO64[:32]),
    ((8, 64), Y16[:8], RHO64),
    ((16, 64), Y16, np.linspace(1.0, 0.01, 64)),
])
def test_holder_resolution_errors(F_shape, y, rho):
    with pytest.raises(ResolutionError):
        cpt.estimate_holder_exponent(np.ones(F_shape), y, rho)


def test_boundary_limit_exact_for_power_law():
    rho = RHO64[::-1][:10][::-1]
    F = 2.0 + 3.0 * np.sort(rho) ** 0.5
    assert cpt.boundary_limit(F) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("a,second,label", [
    (0.5, False, "C0,0.5"), (1.0, False, "C0,b-all"), (1.5, False, "C0,1"), (3.0, False, "C0,1"),
    (1.5, True, "C1,0.5"), (2.0, True, "C1,b-all"), (0.5, True, "C0,0.5"), (3.0, True, "C0,1"),
])
def test_theorem_class_table(a, second, label):
    assert cpt.theorem_class(a, second).label == label


def fake_fit(growth, log=False):
    return DecayFit(-growth, log, 1.0, (5.0, 35.0), 0.0, 0.0, 300)


@pytest.mark.parametrize("a,f1,f2,label", [
    (0.5, fake_fit(0.5), None, "C0,0.5"),
    (1.0, fake_fit(0.0, True), None, "C0,b-all"),
    (1.5, fake_fit(0.0), fake_fit(0.5), "C1,0.5"),
    (2.0, fake_fit(0.0), fake_fit(0.0, True), "C1,b-all"),
])
def test_classify_regularity(a, f1, f2, label):
    assert cpt.classify_regularity(f1, f2, a).label == label


def test_classify_regularity_mismatch():
    with pytest.raises(ClassificationMismatch):
        cpt.classify_regularity(fake_fit(0.5), None, 1.5)
