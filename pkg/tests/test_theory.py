import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensor_rmt import (LimitParams, ValidationError, WrongBranchError,
                        compute_summary_stats, density, solve_stieltjes,
                        support_edges)

from .oracles import semicircle_g, unit_variance_solve

THIRDS = LimitParams(c1=1 / 3, c2=1 / 3, c3=1 / 3, beta_t=0.0, beta_m=0.0)
FIG1 = LimitParams.from_dims(130, 80, 140, beta_t=2.0, beta_m=3.0)

# independently validated reference values for the FIG1 geometry
FIG1_LAMBDA = 6.4144337125295685
FIG1_ALPHA = (0.9607448617773074, 0.9745986748203669, 0.9949710375357633)


# ---------------------------------------------------------------------------
# coupled Stieltjes solver


@pytest.mark.parametrize("xi", [2.0, 3.0, 5.0, 1.0 + 1.0j])
def test_semicircle_closed_form(xi):
    # equal thirds, no signal: the sum must follow the semicircle
    # transform and split equally across the three blocks
    sol = solve_stieltjes(THIRDS, xi)
    ref = semicircle_g(xi)
    assert abs(sol.g - ref) < 1e-8
    for gi in (sol.g1, sol.g2, sol.g3):
        assert abs(gi - ref / 3.0) < 1e-8


def test_large_xi_decay():
    sol = solve_stieltjes(FIG1, 1e6)
    assert abs(sol.g + 1.0 / 1e6) < 1e-9
    assert abs(sol.g1 + FIG1.c1 / 1e6) < 1e-9


def test_unit_variance_oracle_adaptive():
    # independent transcription of the same equations, plain iteration
    p = LimitParams(c1=0.3, c2=0.25, c3=0.45, beta_t=1.5, beta_m=2.0)
    for xi in (4.0 + 0.5j, -5.0 + 0.2j, 7.5):
        sol = solve_stieltjes(p, xi)
        ref = unit_variance_solve(xi, 0.3, 0.25, 0.45, 1.5)
        assert abs(sol.g1 - ref[0]) < 1e-12
        assert abs(sol.g2 - ref[1]) < 1e-12
        assert abs(sol.g3 - ref[2]) < 1e-12


def test_unit_variance_oracle_fixed():
    p = LimitParams(c1=0.3, c2=0.25, c3=0.45, beta_t=1.5, beta_m=2.0)
    sol = solve_stieltjes(p, 5.0 + 0.1j, mode="fixed-gamma", gamma_input=2.7)
    ref = unit_variance_solve(5.0 + 0.1j, 0.3, 0.25, 0.45, 1.5,
                              gamma_bar=2.7)
    assert abs(sol.g1 - ref[0]) < 1e-12
    assert abs(sol.g3 - ref[2]) < 1e-12
    assert sol.gamma_bar == 2.7


def test_mode_aliases():
    a = solve_stieltjes(FIG1, 8.0, mode="adaptive-gamma")
    for alias in ("approximate-gamma", "approximate gamma", "approximate-γ̄"):
        b = solve_stieltjes(FIG1, 8.0, mode=alias)
        assert b.g == a.g
        assert b.mode == "adaptive-gamma"
    c = solve_stieltjes(FIG1, 8.0, mode="compute-γ̄", gamma_input=1.0)
    assert c.mode == "fixed-gamma"
    with pytest.raises(ValidationError):
        solve_stieltjes(FIG1, 8.0, mode="exact")
    with pytest.raises(ValidationError):
        solve_stieltjes(FIG1, 8.0, mode="fixed-gamma")  # needs gamma_input
    with pytest.raises(ValidationError):
        solve_stieltjes(FIG1, 0.0)


def test_warm_start_reaches_same_fixed_point():
    base = solve_stieltjes(FIG1, 7.0 + 1e-3j)
    warm = solve_stieltjes(FIG1, 7.05 + 1e-3j,
                           g_init=(base.g1, base.g2, base.g3))
    cold = solve_stieltjes(FIG1, 7.05 + 1e-3j)
    assert abs(warm.g - cold.g) < 1e-11
    assert warm.sweeps <= cold.sweeps


def test_wrong_branch_detection():
    # far below the real axis the iteration lands on the conjugate
    # branch; with Im xi > 0 that must be flagged
    with pytest.raises(WrongBranchError):
        solve_stieltjes(
            THIRDS, 0.5 + 1e-6j,
            g_init=(0.1 - 0.5j, 0.1 - 0.5j, 0.1 - 0.5j))


@settings(max_examples=25, deadline=None)
@given(
    dims=st.tuples(st.integers(20, 200), st.integers(20, 200),
                   st.integers(20, 200)),
    beta_t=st.floats(0.0, 4.0),
    beta_m=st.floats(0.0, 4.0),
    st2=st.floats(0.5, 2.0),
    sm2=st.floats(0.5, 2.0),
    off=st.floats(0.1, 3.0),
    height=st.floats(1e-4, 1.0),
)
def test_random_params_residual_property(dims, beta_t, beta_m, st2, sm2,
                                         off, height):
    p = LimitParams.from_dims(*dims, beta_t=beta_t, beta_m=beta_m,
                              sigma_t2=st2, sigma_m2=sm2)
    hi = 4.0 * math.sqrt(max(st2, sm2)) * (1.0 + beta_t)
    sol = solve_stieltjes(p, hi + off + 1j * height)
    assert sol.residual < 1e-10
    assert sol.g.imag > 0


# ---------------------------------------------------------------------------
# support detection


def test_support_semicircle_edges():
    sup = support_edges(THIRDS)
    assert len(sup) == 1
    edge = 2.0 * math.sqrt(2.0 / 3.0)
    assert sup[0][0] == pytest.approx(-edge, abs=0.02)
    assert sup[0][1] == pytest.approx(edge, abs=0.02)


def test_support_widens_with_tensor_signal():
    base = LimitParams.from_dims(80, 100, 90, beta_t=0.0, beta_m=0.0)
    edges = []
    for bt in (0.0, 1.0, 2.0, 3.0):
        p = LimitParams(c1=base.c1, c2=base.c2, c3=base.c3, beta_t=bt,
                        beta_m=0.0)
        edges.append(support_edges(p)[-1][1])
    assert all(b > a + 1e-3 for a, b in zip(edges, edges[1:]))


def test_support_ignores_matrix_signal():
    # the bulk does not depend on beta_m: the cached scan is shared
    a = support_edges(FIG1)
    b = support_edges(LimitParams(c1=FIG1.c1, c2=FIG1.c2, c3=FIG1.c3,
                                  beta_t=2.0, beta_m=0.5))
    assert a == b


def test_support_validation():
    with pytest.raises(ValidationError):
        support_edges(THIRDS, scan_range=(2.0, -2.0))
    with pytest.raises(ValidationError):
        support_edges(THIRDS, n_points=3)
    with pytest.raises(ValidationError):
        support_edges(THIRDS, epsilon=0.0)


# ---------------------------------------------------------------------------
# limiting density


def test_density_semicircle_shape():
    grid = np.linspace(-2.5, 2.5, 401)
    curve = density(THIRDS, grid, epsilon=1e-6)
    peak = 3.0 / (math.pi * math.sqrt(6.0))  # semicircle height at 0
    mid = curve.density[200]
    assert mid == pytest.approx(peak, abs=1e-3)
    assert curve.mass == pytest.approx(1.0, abs=5e-3)
    assert len(curve.support) == 1
    assert curve.spikes == ()


def test_density_fixed_gamma_mass_and_spikes():
    stats = compute_summary_stats(FIG1)
    sup = support_edges(FIG1)
    lo, hi = sup[0][0] - 0.5, sup[-1][1] + 0.5
    curve = density(FIG1, np.linspace(lo, hi, 501), stats=stats)
    assert curve.mass == pytest.approx(1.0, abs=5e-3)
    assert curve.spikes == ((2.0 * stats.lambda_bar, 1),
                            (-stats.lambda_bar, 2))
    # one symmetric bulk interval; the adaptive-coupling scan edge sits
    # slightly inside it but the two stay close
    assert len(curve.support) == 1
    ledge, redge = curve.support[0]
    assert ledge == pytest.approx(-redge, abs=0.05)
    assert redge == pytest.approx(sup[-1][1], abs=0.1)
    assert redge >= sup[-1][1] - 0.02


def test_density_validation():
    with pytest.raises(ValidationError):
        density(THIRDS, np.array([1.0, 2.0, 3.0]))  # < 4 points
    with pytest.raises(ValidationError):
        density(THIRDS, np.array([1.0, 0.5, 2.0, 3.0]))  # not ascending
    with pytest.raises(ValidationError):
        density(THIRDS, np.linspace(-1, 1, 8), epsilon=-1.0)


# ---------------------------------------------------------------------------
# summary statistics


def test_summary_stats_reference_point():
    stats = compute_summary_stats(FIG1)
    assert stats.branch == "outside-support"
    assert stats.lambda_bar == pytest.approx(FIG1_LAMBDA, abs=1e-6)
    assert stats.alpha1 == pytest.approx(FIG1_ALPHA[0], abs=1e-6)
    assert stats.alpha2 == pytest.approx(FIG1_ALPHA[1], abs=1e-6)
    assert stats.alpha3 == pytest.approx(FIG1_ALPHA[2], abs=1e-6)
    assert stats.gamma_bar == pytest.approx(
        FIG1.gamma_coef * stats.alpha3 ** 2, abs=1e-12)


def test_alignment_ratio_identities():
    # alpha_1^2 and alpha_2^2 admit closed ratio forms in the g's at the
    # root; both must agree with the q-form values
    stats = compute_summary_stats(FIG1)
    g1, g2, g3 = stats.g_at_root
    g = g1 + g2 + g3
    lam, gb = stats.lambda_bar, stats.gamma_bar
    st2, sm2 = FIG1.sigma_t2, FIG1.sigma_m2
    num = lam + gb * sm2 * (g1 + g2) + st2 * g
    r1 = num / (lam + gb * sm2 * g2 + st2 * (g - g1))
    r2 = num / (lam + gb * sm2 * g1 + st2 * (g - g2))
    assert stats.alpha1 ** 2 == pytest.approx(r1, abs=1e-8)
    assert stats.alpha2 ** 2 == pytest.approx(r2, abs=1e-8)


def test_lambda_bar_identity():
    # lam = bt*bm*a1*a2*a3 - gamma_bar*sm2*(g1+g2) - st2*g at the root
    stats = compute_summary_stats(FIG1)
    g1, g2, g3 = stats.g_at_root
    rhs = (FIG1.beta_t * FIG1.beta_m
           * stats.alpha1 * stats.alpha2 * stats.alpha3
           - stats.gamma_bar * FIG1.sigma_m2 * (g1 + g2)
           - FIG1.sigma_t2 * (g1 + g2 + g3))
    assert stats.lambda_bar == pytest.approx(rhs, abs=1e-8)


def test_gamma_self_consistency():
    # solving at the real root in adaptive mode must reproduce gamma_bar
    stats = compute_summary_stats(FIG1)
    sol = solve_stieltjes(FIG1, stats.lambda_bar)
    assert sol.gamma_bar == pytest.approx(stats.gamma_bar, abs=1e-8)
    assert sol.g1.imag == pytest.approx(0.0, abs=1e-10)


def test_alpha2_monotone_in_matrix_signal():
    vals = []
    for bm in np.arange(0.0, 4.01, 0.5):
        p = LimitParams.from_dims(40, 110, 90, beta_t=2.0, beta_m=bm)
        vals.append(compute_summary_stats(p).alpha2)
    assert all(b >= a - 0.02 for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0.9


def test_beta_m_zero_branch():
    p = LimitParams.from_dims(40, 110, 90, beta_t=2.0, beta_m=0.0)
    stats = compute_summary_stats(p)
    assert stats.branch == "epsilon-regularized"
    assert stats.alpha1 == 0.0 and stats.alpha2 == 0.0
    assert 0.0 < stats.alpha3 < 1.0
    redge = support_edges(p)[-1][1]
    # no product term: the top eigenvalue stays near the bulk edge
    assert abs(stats.lambda_bar - redge) < 0.15 * 2 * redge


def test_beta_t_zero_branch():
    p = LimitParams.from_dims(40, 110, 90, beta_t=0.0, beta_m=2.5)
    stats = compute_summary_stats(p)
    assert stats.branch == "epsilon-regularized"
    assert (stats.alpha1, stats.alpha2, stats.alpha3) == (0.0, 0.0, 0.0)
    assert stats.lambda_bar == pytest.approx(support_edges(p)[-1][1])
    assert stats.gamma_bar == 0.0


def test_below_transition_uses_regularized_branch():
    p = LimitParams.from_dims(40, 110, 90, beta_t=2.0, beta_m=0.5)
    stats = compute_summary_stats(p)
    assert stats.branch == "epsilon-regularized"
    assert stats.epsilon_used == 1e-3
    assert 0.0 <= stats.alpha1 < 0.6
    assert 0.0 < stats.alpha3 <= 1.0


def test_spike_positions_exported():
    stats = compute_summary_stats(FIG1)
    blob = stats.to_json()
    assert f"{2.0 * stats.lambda_bar}" in blob
    assert "outside-support" in blob


def test_params_validation():
    with pytest.raises(ValidationError):
        LimitParams(c1=0.5, c2=0.5, c3=0.2, beta_t=1.0, beta_m=1.0)
    with pytest.raises(ValidationError):
        LimitParams(c1=0.5, c2=0.5, c3=0.0, beta_t=1.0, beta_m=1.0)
    with pytest.raises(ValidationError):
        LimitParams(c1=1 / 3, c2=1 / 3, c3=1 / 3, beta_t=-1.0, beta_m=0.0)
    with pytest.raises(ValidationError):
        LimitParams.from_dims(0, 4, 5, beta_t=1.0, beta_m=1.0)
    with pytest.raises(ValidationError):
        compute_summary_stats(FIG1, epsilon_fallback=0.0)
