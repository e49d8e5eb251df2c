"""Norms, invariants, mixed norms, and inequality probes against oracles."""

import math

import numpy as np
import pytest

from kdv5.diagnostics import (
    NormSpec,
    build_report,
    conserved_quantities,
    interpolation_check,
    lambda_norm_series,
    lambda_norms,
    leibniz_check,
    mixed_spacetime_norm,
    pointwise_formula_residual,
    second_derivative_energy_bound,
    sobolev_norm,
    weighted_energy_residual,
    weighted_l2_norm,
)
from kdv5.evolution import Trajectory, integrate
from kdv5.families import gaussian, random_family
from kdv5.grid import RealField, make_grid


@pytest.fixture(scope="module")
def desk_grid():
    return make_grid(32 * np.pi, 1024)


def make_traj(grid, times, rows):
    return Trajectory(grid, np.asarray(times, dtype=float), np.asarray(rows), {})


# --- norms ------------------------------------------------------------------


def test_sobolev_norm_cosine():
    g = make_grid(np.pi, 64)
    f = RealField(g, np.cos(g.x))
    assert sobolev_norm(f, 0.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert sobolev_norm(f, 2.0) == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-12)


def test_sobolev_norm_zero_field(desk_grid):
    f = RealField(desk_grid, np.zeros(desk_grid.n))
    for s in (-1.0, 0.0, 2.5):
        assert sobolev_norm(f, s) == 0.0
    with pytest.raises(ValueError):
        sobolev_norm(f, -3.0)


def test_sobolev_norm_monotone_in_s(desk_grid):
    rng = np.random.default_rng(3)
    f = RealField(desk_grid, rng.normal(size=desk_grid.n))
    values = [sobolev_norm(f, s) for s in (-1.0, 0.0, 0.5, 1.0, 2.0)]
    assert all(a <= b * (1 + 1e-14) for a, b in zip(values, values[1:]))


def test_weighted_norm_r0_equals_l2(desk_grid):
    rng = np.random.default_rng(4)
    f = RealField(desk_grid, rng.normal(size=desk_grid.n))
    assert weighted_l2_norm(f, 0.0) == pytest.approx(sobolev_norm(f, 0.0), rel=1e-12)


def test_weighted_norm_zero_field(desk_grid):
    assert weighted_l2_norm(RealField(desk_grid, np.zeros(desk_grid.n)), 0.5) == 0.0


def test_weighted_norm_matches_refined_quadrature(desk_grid):
    """Trapezoid value against the same integrand on a 4x finer grid."""
    f = gaussian(desk_grid, amplitude=1.0, width=4.0)
    coarse = weighted_l2_norm(f, 0.5, 8)
    fine_grid = make_grid(desk_grid.half_width, 4 * desk_grid.n)
    fine = weighted_l2_norm(gaussian(fine_grid, amplitude=1.0, width=4.0), 0.5, 8)
    assert coarse == pytest.approx(fine, rel=1e-8)


# --- conserved functionals ---------------------------------------------------


def test_conserved_quantities_zero(desk_grid):
    f = RealField(desk_grid, np.zeros(desk_grid.n))
    assert conserved_quantities(f, 1) == (0.0, 0.0)
    assert conserved_quantities(f, 2) == (0.0, 0.0)


def test_conserved_quantities_cosine_closed_forms():
    g = make_grid(np.pi, 128)
    f = RealField(g, np.cos(g.x))
    i1, i2 = conserved_quantities(f, 1)
    # int cos^2 = pi, int cos^3 = 0, u_xx = -cos
    assert i1 == pytest.approx(math.pi, rel=1e-12)
    assert i2 == pytest.approx(math.pi / 2.0, rel=1e-12)
    _, i2c = conserved_quantities(f, 2)
    # (1/12) int cos^4 + (1/2) int cos^2 = pi/16 + pi/2
    assert i2c == pytest.approx(math.pi / 16.0 + math.pi / 2.0, rel=1e-12)


def test_conserved_quantities_match_refined_quadrature(desk_grid):
    f = gaussian(desk_grid, amplitude=1.2, width=4.0)
    fine_grid = make_grid(desk_grid.half_width, 4 * desk_grid.n)
    ff = gaussian(fine_grid, amplitude=1.2, width=4.0)
    for k in (1, 2):
        coarse = conserved_quantities(f, k)
        fine = conserved_quantities(ff, k)
        assert coarse[0] == pytest.approx(fine[0], rel=1e-10)
        assert coarse[1] == pytest.approx(fine[1], rel=1e-10)


# --- mixed space-time norms ---------------------------------------------------


def brute_force_mixed(traj, spec):
    """Literal double-loop realization of the discrete mixed norm."""
    grid = traj.grid
    if spec.prefix == "none":
        vals = np.abs(traj.states)
    else:
        vals = []
        for i in range(traj.times.size):
            hat = np.fft.fft(traj.states[i])
            if spec.prefix == "dx":
                hat = hat * (1j * grid.xi_odd)
            elif spec.prefix == "dx4":
                hat = hat * grid.xi**4
            else:
                hat = hat * (np.abs(grid.xi) ** spec.frac_order * 1j * grid.xi_odd)
            vals.append(np.abs(np.fft.ifft(hat).real))
        vals = np.array(vals)
    p, q = spec.space_exponent, spec.time_exponent
    if spec.outer == "space":
        inner = []
        for j in range(grid.n):
            col = vals[:, j]
            inner.append(col.max() if q == math.inf else np.trapezoid(col**q, traj.times) ** (1 / q))
        inner = np.array(inner)
        total = inner.max() if p == math.inf else (grid.dx * np.sum(inner**p)) ** (1 / p)
    else:
        inner = []
        for i in range(traj.times.size):
            row = vals[i]
            inner.append(row.max() if p == math.inf else (grid.dx * np.sum(row**p)) ** (1 / p))
        inner = np.array(inner)
        total = inner.max() if q == math.inf else np.trapezoid(inner**q, traj.times) ** (1 / q)
    if spec.damp_rho is not None:
        total *= (1.0 + traj.times[-1]) ** (-spec.damp_rho)
    return float(total)


SPECS = [
    NormSpec(2.0, math.inf),
    NormSpec(4.0, math.inf, damp_rho=1.0),
    NormSpec(16.0 / 5.0, math.inf),
    NormSpec(math.inf, 2.0, prefix="dx4"),
    NormSpec(math.inf, 2.0, prefix="frac_dx", frac_order=1.7),
    NormSpec(math.inf, 4.0, prefix="dx", outer="time"),
    NormSpec(2.0, math.inf, outer="time"),
]


@pytest.mark.parametrize("spec", SPECS)
def test_mixed_norm_matches_brute_force(spec):
    g = make_grid(8 * np.pi, 64)
    rng = np.random.default_rng(17)
    times = np.linspace(0.0, 0.3, 5)
    rows = rng.normal(size=(5, g.n))
    traj = make_traj(g, times, rows)
    assert mixed_spacetime_norm(traj, spec) == pytest.approx(
        brute_force_mixed(traj, spec), rel=1e-13
    )


def test_mixed_norm_zero_trajectory(desk_grid):
    traj = make_traj(desk_grid, [0.0, 0.1], np.zeros((2, desk_grid.n)))
    for spec in SPECS:
        assert mixed_spacetime_norm(traj, spec) == 0.0


def test_mixed_norm_time_constant_sup():
    g = make_grid(8 * np.pi, 64)
    rng = np.random.default_rng(18)
    row = rng.normal(size=g.n)
    traj = make_traj(g, np.linspace(0, 1, 4), np.tile(row, (4, 1)))
    spec = NormSpec(math.inf, math.inf)
    assert mixed_spacetime_norm(traj, spec) == pytest.approx(np.abs(row).max(), rel=1e-14)


def test_norm_spec_validation():
    with pytest.raises(ValueError):
        NormSpec(2.0, 2.0, prefix="bogus")
    with pytest.raises(ValueError):
        NormSpec(0.5, 2.0)
    with pytest.raises(ValueError):
        NormSpec(2.0, 2.0, outer="middle")


# --- contraction-norm family --------------------------------------------------


def test_lambda_norms_zero_trajectory(desk_grid):
    traj = make_traj(desk_grid, np.linspace(0, 0.5, 5), np.zeros((5, desk_grid.n)))
    for k in (1, 2):
        lams, big = lambda_norms(traj, 0.5, k)
        assert big == 0.0
        assert all(v == 0.0 for v in lams.values())


def test_lambda_norms_time_constant_sup(desk_grid):
    # the sup-in-time Sobolev member of a frozen trajectory is simply the
    # snapshot's norm
    f = gaussian(desk_grid, 0.7, 6.0)
    traj = make_traj(desk_grid, np.linspace(0, 1, 5), np.tile(f.samples, (5, 1)))
    lams, _ = lambda_norms(traj, 0.5, 1)
    assert lams["lambda1"] == pytest.approx(sobolev_norm(f, 2.0), rel=1e-12)


def test_lambda_norms_max_dominates(desk_grid):
    u0 = gaussian(desk_grid, 0.5, 8.0)
    traj = integrate(u0, 0.25, 0.25 / 256, 1, store_every=32)
    lams, big = lambda_norms(traj, 0.5, 1, rho=1.0)
    assert big == max(lams.values())
    assert all(v <= big for v in lams.values())
    with pytest.raises(ValueError):
        lambda_norms(traj, 0.5, 1, rho=0.5)


@pytest.mark.parametrize("k", (1, 2))
def test_free_group_bounded_ratios(desk_grid, k):
    """Each contraction norm of a free trajectory is controlled by the data's
    Sobolev size, with a constant stable across disjoint seeded families
    (the finite-family realization of the linear-group estimates)."""
    from kdv5.diagnostics import free_trajectory

    def family_maxima(seed):
        out = {}
        for f in random_family(desk_grid, 20, seed):
            h = sobolev_norm(f, 2.0)  # 4r with r = 1/2, and the k=2 index
            for T in (0.5, 1.0):
                traj = free_trajectory(f, T, 32)
                lams, _ = lambda_norms(traj, 0.5, k)
                for name in ("lambda1", "lambda2", "lambda3", "lambda4"):
                    out[name] = max(out.get(name, 0.0), lams[name] / h)
                # quarter-power smoothing of the group in time-outer L^4
                d34 = mixed_spacetime_norm(
                    traj, NormSpec(math.inf, 4.0, prefix="frac", frac_order=0.75, outer="time")
                )
                out["frac34"] = max(out.get("frac34", 0.0), d34 / sobolev_norm(f, 0.0))
        return out

    fit, holdout = family_maxima(1001), family_maxima(2002)
    for name, fitted in fit.items():
        assert np.isfinite(fitted)
        assert holdout[name] <= 1.5 * fitted, (name, fitted, holdout[name])
    # the sup-in-time Sobolev norm of the free flow is exactly the data's
    assert fit["lambda1"] == pytest.approx(1.0, rel=1e-12)


def test_weighted_sup_growth_shape_fit_holdout(desk_grid):
    """Free-flow growth of the fractionally weighted sup norm: linear-in-T
    envelope m(u0) + C (1+T)(||u0|| + ||D^{4r} u0||), C fitted on one
    seeded family and asserted on a disjoint one."""
    from kdv5.diagnostics import free_trajectory, origin_vanishing_weight

    r = 0.5
    m = origin_vanishing_weight(desk_grid, r, 8)
    dx = desk_grid.dx

    def weighted_sup(traj):
        return float(np.sqrt(dx * np.sum((traj.states * m) ** 2, axis=1)).max())

    def shape_constant(seed):
        worst = 0.0
        for f in random_family(desk_grid, 20, seed):
            base = np.sqrt(dx * np.sum((m * f.samples) ** 2))
            hat = np.fft.fft(f.samples)
            unit = sobolev_norm(f, 0.0) + float(
                np.sqrt(desk_grid.spectral_weight * np.sum(np.abs(np.abs(desk_grid.xi) ** (4 * r) * hat) ** 2))
            )
            for T in (0.25, 0.5, 1.0):
                lam5 = weighted_sup(free_trajectory(f, T, 32))
                worst = max(worst, (lam5 - base) / ((1.0 + T) * unit))
        return worst

    fitted = max(shape_constant(1001), 0.0)
    assert np.isfinite(fitted)
    assert shape_constant(2002) <= 1.25 * fitted + 1e-12


def test_lambda_series_consistent_with_full_window(desk_grid):
    u0 = gaussian(desk_grid, 0.5, 8.0)
    for k in (1, 2):
        traj = integrate(u0, 0.25, 0.25 / 256, k, store_every=64)
        series = lambda_norm_series(traj, 0.5, k, rho=1.0, n_plateau=8)
        lams, _ = lambda_norms(traj, 0.5, k, rho=1.0, n_plateau=8)
        for name, value in lams.items():
            assert series[name][-1] == pytest.approx(value, rel=1e-10), name


# --- inequality probes ---------------------------------------------------------


def test_interpolation_check_rejects_zero(desk_grid):
    with pytest.raises(ValueError):
        interpolation_check(RealField(desk_grid, np.zeros(desk_grid.n)), 2.0, 0.5, 0.5)


def test_interpolation_ratios_finite_over_family(desk_grid):
    fam = random_family(desk_grid, 20, seed=1001)
    for theta in (0.25, 0.5, 0.75):
        ratios = []
        for f in fam:
            lhs, rhs = interpolation_check(f, 2.0, 0.5, theta, 8)
            assert rhs > 0
            ratios.append(lhs / rhs)
        assert max(ratios) < 10.0


def test_interpolation_constant_n_independent(desk_grid):
    fam = random_family(desk_grid, 20, seed=1001)
    maxima = []
    for n_plateau in (4, 8, 16):
        maxima.append(
            max(
                (lambda p: p[0] / p[1])(interpolation_check(f, 2.0, 0.5, 0.5, n_plateau))
                for f in fam
            )
        )
    assert max(maxima) <= 2.0 * min(maxima)


def test_interpolation_classical_limit(desk_grid):
    # b -> 0 degenerates to spectral Holder interpolation, ratio <= 1
    f = gaussian(desk_grid, 1.0, 5.0)
    lhs, rhs = interpolation_check(f, 2.0, 1e-6, 0.5, 8)
    assert lhs <= (1.0 + 1e-6) * rhs


def test_leibniz_ratios(desk_grid):
    fam = random_family(desk_grid, 20, seed=1001)
    for n in (1, 2):
        ratios = []
        for f in fam:
            lhs, rhs = leibniz_check(f, 0.5, n, 8)
            ratios.append(lhs / rhs)
        assert max(ratios) < 10.0
    constant = RealField(desk_grid, np.full(desk_grid.n, 2.0))
    lhs, _ = leibniz_check(constant, 0.5, 1, 8)
    assert lhs < 1e-12


def test_leibniz_constant_n_independent(desk_grid):
    fam = random_family(desk_grid, 20, seed=1001)
    maxima = []
    for n_plateau in (4, 8, 16):
        maxima.append(max((lambda p: p[0] / p[1])(leibniz_check(f, 0.5, 2, n_plateau)) for f in fam))
    assert max(maxima) <= 2.0 * min(maxima)


def test_leibniz_rejects_bad_order(desk_grid):
    f = gaussian(desk_grid, 1.0, 5.0)
    with pytest.raises(ValueError):
        leibniz_check(f, 0.5, 3)


# --- free-group commutator ------------------------------------------------------


def test_commutator_residual_vanishes_at_t0(desk_grid):
    f = gaussian(desk_grid, 1.0, 5.0)
    residual, _ = pointwise_formula_residual(f, 0.4, 0.0, 8)
    assert residual < 1e-13


def test_commutator_residual_zero_data(desk_grid):
    f = RealField(desk_grid, np.zeros(desk_grid.n))
    residual, bound = pointwise_formula_residual(f, 0.4, 1.0, 8)
    assert residual == 0.0
    assert bound == 0.0


def test_commutator_ratio_bounded_over_family(desk_grid):
    fam = random_family(desk_grid, 20, seed=1001)
    ratios = []
    for f in fam:
        for t in (0.25, 0.5, 1.0):
            residual, bound = pointwise_formula_residual(f, 0.4, t, 8)
            ratios.append(residual / bound)
    assert max(ratios) < 1.0  # single uniform constant over the family

    with pytest.raises(ValueError):
        pointwise_formula_residual(fam[0], 1.5, 0.5)


# --- energy balance --------------------------------------------------------------


def test_energy_residual_weightless_case(desk_grid):
    u0 = gaussian(desk_grid, 1.0, 8.0)
    traj = integrate(u0, 1.0, 1.0 / 2048, 1, store_every=16)
    assert weighted_energy_residual(traj, 0.0, 1) <= 1e-8


def test_energy_residual_zero_trajectory(desk_grid):
    traj = make_traj(desk_grid, np.linspace(0, 1, 9), np.zeros((9, desk_grid.n)))
    assert weighted_energy_residual(traj, 0.5, 1, 8) == 0.0


def test_energy_residual_refinement_order():
    g = make_grid(32 * np.pi, 2048)
    u0 = gaussian(g, amplitude=2.0, width=5.0)
    vals = []
    for store_every in (128, 64, 32, 16):
        traj = integrate(u0, 1.0, 1.0 / 2048, 1, store_every=store_every)
        vals.append(weighted_energy_residual(traj, 0.5, 1, 8))
    order = np.log2(vals[0] / vals[-1]) / (len(vals) - 1)
    assert order >= 1.8, (vals, order)


def test_second_derivative_energy_bound():
    g = make_grid(32 * np.pi, 2048)
    u0 = gaussian(g, amplitude=0.5, width=8.0)
    traj = integrate(u0, 1.0, 1.0 / 2048, 2)
    lhs, rhs = second_derivative_energy_bound(traj)
    assert lhs <= rhs + 1e-6


@pytest.mark.parametrize("k", (1, 2))
def test_apriori_bound_on_holdout_family(k):
    """The calibrated energy-bound constant covers runs it was not fit on."""
    from kdv5.calibration import PROTOCOL
    from kdv5.diagnostics import apriori_h2_bound

    p = PROTOCOL["apriori"]
    grid = make_grid(32 * np.pi, 2048 if k == 2 else 1024)
    for amp in p["holdout_amplitudes"]:
        u0 = gaussian(grid, amplitude=amp, width=p["width"])
        traj = integrate(u0, p["T"], p["T"] / p["steps"], k, store_every=64)
        max_h2_sq, bound = apriori_h2_bound(traj, k)
        assert max_h2_sq <= bound, (k, amp, max_h2_sq, bound)


def test_apriori_zero_data(desk_grid):
    traj = make_traj(desk_grid, np.linspace(0, 0.1, 3), np.zeros((3, desk_grid.n)))
    from kdv5.diagnostics import apriori_h2_bound

    max_h2_sq, bound = apriori_h2_bound(traj, 1)
    assert max_h2_sq == 0.0 and bound == 0.0


def test_smoothing_ratio_rejects_zero(desk_grid):
    from kdv5.diagnostics import smoothing_ratio

    with pytest.raises(ValueError):
        smoothing_ratio(RealField(desk_grid, np.zeros(desk_grid.n)), 0.5)


# --- report assembly ---------------------------------------------------------------


def test_build_report_columns(desk_grid):
    u0 = gaussian(desk_grid, 0.5, 8.0)
    traj = integrate(u0, 0.25, 0.25 / 256, 1, store_every=32)
    report = build_report(traj, r=0.5, k=1, rho=1.0)
    expected = {"I1", "I2", "H2", "Hs_target", "weighted_r",
                "lambda1", "lambda2", "lambda3", "lambda4", "lambda5"}
    assert expected == set(report.series)
    assert all(len(col) == traj.times.size for col in report.series.values())
    report.add_check("demo", 1.0, 2.0)
    assert report.checks[0]["ratio"] == 0.5
