"""Norms, conserved functionals, and inequality residuals.

Sobolev norms are spectral sums through the smoothing multiplier
(1 + xi^2)^(s/2); weighted norms are trapezoid quadrature against sampled
weights.  Because an unbounded weight is meaningless at the periodic seam,
every "smooth" bracket weight is realized as its plateau truncation at the
widest admissible N (``weights.default_plateau_n``); callers pass an
explicit N to probe N-dependence.  The vanishing-at-origin fractional
weight |x|^r is realized as w_N^r - 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import weights as weights_mod
from .evolution import Trajectory
from .grid import Grid, RealField, derivative, free_propagate

__all__ = [
    "sobolev_norm",
    "weighted_l2_norm",
    "origin_vanishing_weight",
    "conserved_quantities",
    "NormSpec",
    "mixed_spacetime_norm",
    "lambda_norms",
    "lambda_norm_series",
    "interpolation_check",
    "leibniz_check",
    "pointwise_formula_residual",
    "weighted_energy_residual",
    "apriori_h2_bound",
    "second_derivative_energy_bound",
    "free_trajectory",
    "smoothing_ratio",
    "DiagnosticsReport",
    "build_report",
]


def _resolve_plateau(grid: Grid, n_plateau: int | None) -> int:
    return weights_mod.default_plateau_n(grid) if n_plateau is None else int(n_plateau)


def _spectral_l2(grid: Grid, hats: np.ndarray, s: float = 0.0) -> np.ndarray:
    """Sobolev norm(s) of FFT rows via the spectral sum."""
    mult = (1.0 + grid.xi**2) ** s if s != 0.0 else 1.0
    return np.sqrt(grid.spectral_weight * np.sum(mult * np.abs(hats) ** 2, axis=-1))


def _trapezoid_l2(grid: Grid, samples: np.ndarray, density: np.ndarray | float = 1.0) -> np.ndarray:
    """(int f^2 * density dx)^(1/2) by the trapezoid rule on the periodic grid."""
    return np.sqrt(grid.dx * np.sum(samples**2 * density, axis=-1))


def sobolev_norm(f: RealField, s: float) -> float:
    """H^s norm computed spectrally; monotone non-decreasing in s."""
    s = float(s)
    if s < -2.0:
        raise ValueError(f"s must be >= -2, got {s}")
    return float(_spectral_l2(f.grid, np.fft.fft(f.samples), s))


def weighted_l2_norm(f: RealField, r: float, n_plateau: int | None = None) -> float:
    """L2 norm against the 2r-th power of the plateau weight."""
    fam = weights_mod.truncated_family(f.grid, _resolve_plateau(f.grid, n_plateau))
    return float(_trapezoid_l2(f.grid, f.samples, fam.power_derivative(2.0 * float(r), 0)))


def origin_vanishing_weight(grid: Grid, r: float, n_plateau: int | None = None) -> np.ndarray:
    """Samples of w_N^r - 1, the surrogate for the fractional weight |x|^r."""
    fam = weights_mod.truncated_family(grid, _resolve_plateau(grid, n_plateau))
    return fam.power_derivative(float(r), 0) - 1.0


def conserved_quantities(f: RealField, k: int) -> tuple[float, float]:
    """(I1, I2): the quadratic invariant and the energy-type invariant.

    I1 = int u^2.  I2 = 1/((k+1)(k+2)) int u^(k+2) + (1/2) int (u_xx)^2;
    the coefficient ratio is forced by d/dt[a int u_xx^2 + b int u^(k+2)]
    = ((k+1)(k+2) b - 2a) int u^k u_x u_xxxx, so for k=1 this is
    (1/6) int u^3 + (1/2) int (u_xx)^2 and for k=2
    (1/12) int u^4 + (1/2) int (u_xx)^2.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    dx = f.grid.dx
    u = f.samples
    uxx = derivative(f, 2).samples
    i1 = dx * np.sum(u**2)
    i2 = dx * np.sum(u ** (k + 2)) / ((k + 1.0) * (k + 2.0)) + 0.5 * dx * np.sum(uxx**2)
    return float(i1), float(i2)


@dataclass(frozen=True)
class NormSpec:
    """A mixed space-time norm on trajectories.

    outer="space" is the L^p_x L^q_T convention (q-norm in time inside,
    p-norm in space outside); outer="time" transposes it, which the sup-in-
    time and L^4-in-time members of the contraction norm family need.
    prefix applies a per-snapshot spectral operator: "none", "dx" (first
    derivative), "dx2"/"dx4" (higher derivatives), "frac" (|xi|^frac_order),
    "frac_dx" (|xi|^frac_order then dx).  damp_rho, if set, multiplies by
    (1+T)^(-damp_rho).
    """

    space_exponent: float
    time_exponent: float
    prefix: str = "none"
    frac_order: float = 0.0
    outer: str = "space"
    damp_rho: float | None = None

    def __post_init__(self):
        if self.prefix not in ("none", "dx", "dx2", "dx4", "frac", "frac_dx"):
            raise ValueError(f"unknown prefix {self.prefix!r}")
        if self.outer not in ("space", "time"):
            raise ValueError(f"outer must be 'space' or 'time', got {self.outer!r}")
        for e in (self.space_exponent, self.time_exponent):
            if not (e == math.inf or e >= 1.0):
                raise ValueError(f"exponents must be >= 1 or inf, got {e}")


def _prefix_multiplier(grid: Grid, spec: NormSpec) -> np.ndarray | None:
    if spec.prefix == "none":
        return None
    if spec.prefix == "dx":
        return 1j * grid.xi_odd
    if spec.prefix == "dx2":
        return -(grid.xi**2) + 0j
    if spec.prefix == "dx4":
        return grid.xi**4 + 0j
    if spec.prefix == "frac":
        return np.abs(grid.xi) ** spec.frac_order + 0j
    return np.abs(grid.xi) ** spec.frac_order * (1j * grid.xi_odd)


def _apply_prefix(traj: Trajectory, spec: NormSpec) -> np.ndarray:
    mult = _prefix_multiplier(traj.grid, spec)
    if mult is None:
        return traj.states
    hats = np.fft.fft(traj.states, axis=1)
    return np.fft.ifft(hats * mult, axis=1).real


def mixed_spacetime_norm(traj: Trajectory, spec: NormSpec) -> float:
    """Discrete mixed norm: trapezoid in time, Riemann sum in space,
    maxima for infinite exponents."""
    if traj.times.size == 0:
        raise ValueError("trajectory is empty")
    grid = traj.grid
    vals = np.abs(_apply_prefix(traj, spec))
    p, q = spec.space_exponent, spec.time_exponent
    if spec.outer == "space":
        inner = (
            vals.max(axis=0)
            if q == math.inf
            else np.trapezoid(vals**q, traj.times, axis=0) ** (1.0 / q)
        )
        total = inner.max() if p == math.inf else (grid.dx * np.sum(inner**p)) ** (1.0 / p)
    else:
        inner = (
            vals.max(axis=1)
            if p == math.inf
            else (grid.dx * np.sum(vals**p, axis=1)) ** (1.0 / p)
        )
        total = inner.max() if q == math.inf else np.trapezoid(inner**q, traj.times) ** (1.0 / q)
    if spec.damp_rho is not None:
        total *= (1.0 + traj.tmax) ** (-spec.damp_rho)
    return float(total)


def _lambda_specs(k: int, r: float, rho: float) -> dict[str, NormSpec]:
    if k == 1:
        return {
            "lambda2": NormSpec(math.inf, 4.0, prefix="dx", outer="time"),
            "lambda3": NormSpec(math.inf, 2.0, prefix="frac_dx", frac_order=4.0 * r),
            "lambda4": NormSpec(2.0, math.inf, damp_rho=rho),
        }
    return {
        "lambda2": NormSpec(math.inf, 2.0, prefix="dx4"),
        "lambda3": NormSpec(16.0 / 5.0, math.inf),
        "lambda4": NormSpec(4.0, math.inf),
    }


def lambda_norms(
    traj: Trajectory, r: float, k: int, rho: float = 1.0, n_plateau: int | None = None
) -> tuple[dict[str, float], float]:
    """The contraction-space norm family for the given k, and its max.

    k=1 (target regularity s = 4r): sup-in-time H^{4r}; d_x u in L^4_T
    L^inf_x; |xi|^{4r} d_x u in L^inf_x L^2_T; (1+T)^{-rho} u in L^2_x
    L^inf_T; the fractionally weighted sup-in-time L^2.  k=2: sup-in-time
    H^2; fourth derivative in L^inf_x L^2_T; u in L^{16/5}_x and L^4_x of
    sup-in-time.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    if rho <= 0.75:
        raise ValueError(f"rho must exceed 3/4, got {rho}")
    grid = traj.grid
    hats = np.fft.fft(traj.states, axis=1)
    s_target = 4.0 * r if k == 1 else 2.0
    out = {"lambda1": float(_spectral_l2(grid, hats, s_target).max())}
    for name, spec in _lambda_specs(k, r, rho).items():
        out[name] = mixed_spacetime_norm(traj, spec)
    if k == 1:
        m = origin_vanishing_weight(grid, r, n_plateau)
        out["lambda5"] = float(_trapezoid_l2(grid, traj.states * m).max())
    return out, max(out.values())


def _cumulative_trapezoid(vals: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(vals)
    np.cumsum((vals[1:] + vals[:-1]) * (h / 2.0), axis=0, out=out[1:])
    return out


def lambda_norm_series(
    traj: Trajectory, r: float, k: int, rho: float = 1.0, n_plateau: int | None = None
) -> dict[str, np.ndarray]:
    """Each norm evaluated on every prefix window [0, t_i] of the trajectory.

    Matches ``lambda_norms`` of the full window at the last entry (same
    arithmetic up to summation order).
    """
    if rho <= 0.75:
        raise ValueError(f"rho must exceed 3/4, got {rho}")
    grid = traj.grid
    h = traj.step()
    hats = np.fft.fft(traj.states, axis=1)
    s_target = 4.0 * r if k == 1 else 2.0
    series = {"lambda1": np.maximum.accumulate(_spectral_l2(grid, hats, s_target))}
    if k == 1:
        dxu = np.abs(np.fft.ifft(hats * (1j * grid.xi_odd), axis=1).real)
        series["lambda2"] = _cumulative_trapezoid(dxu.max(axis=1) ** 4, h) ** 0.25
        frac = np.abs(
            np.fft.ifft(hats * (np.abs(grid.xi) ** (4.0 * r) * (1j * grid.xi_odd)), axis=1).real
        )
        series["lambda3"] = np.sqrt(_cumulative_trapezoid(frac**2, h).max(axis=1))
        cummax = np.maximum.accumulate(np.abs(traj.states), axis=0)
        series["lambda4"] = (
            np.sqrt(grid.dx * np.sum(cummax**2, axis=1)) * (1.0 + traj.times) ** (-rho)
        )
        m = origin_vanishing_weight(grid, r, n_plateau)
        series["lambda5"] = np.maximum.accumulate(_trapezoid_l2(grid, traj.states * m))
    else:
        d4u = np.abs(np.fft.ifft(hats * (grid.xi**4), axis=1).real)
        series["lambda2"] = np.sqrt(_cumulative_trapezoid(d4u**2, h).max(axis=1))
        cummax = np.maximum.accumulate(np.abs(traj.states), axis=0)
        p = 16.0 / 5.0
        series["lambda3"] = (grid.dx * np.sum(cummax**p, axis=1)) ** (1.0 / p)
        series["lambda4"] = (grid.dx * np.sum(cummax**4, axis=1)) ** 0.25
        series["lambda5"] = np.full(traj.times.size, np.nan)
    return series


def interpolation_check(
    f: RealField, a: float, b: float, theta: float, n_plateau: int | None = None
) -> tuple[float, float]:
    """Weighted interpolation inequality probe.

    Returns (lhs, rhs_unit) with lhs = ||J^{theta a}(w^{(1-theta)b} f)|| and
    rhs_unit = ||w^b f||^{1-theta} * ||J^a f||^theta; the caller asserts
    lhs <= C * rhs_unit and studies C across N.
    """
    if a <= 0 or b <= 0 or not 0.0 < theta < 1.0:
        raise ValueError("need a > 0, b > 0 and theta in (0, 1)")
    grid = f.grid
    hat = np.fft.fft(f.samples)
    if _spectral_l2(grid, hat) == 0.0:
        raise ValueError("f must be nonzero")
    fam = weights_mod.truncated_family(grid, _resolve_plateau(grid, n_plateau))
    inner = fam.power_derivative((1.0 - theta) * b, 0) * f.samples
    lhs = _spectral_l2(grid, np.fft.fft(inner), theta * a)
    rhs = (
        float(_trapezoid_l2(grid, f.samples, fam.power_derivative(2.0 * b, 0))) ** (1.0 - theta)
        * float(_spectral_l2(grid, hat, a)) ** theta
    )
    return float(lhs), float(rhs)


def leibniz_check(
    f: RealField, b: float, n: int, n_plateau: int | None = None
) -> tuple[float, float]:
    """Weighted derivative-commutation probe.

    Returns (lhs, rhs_unit) with lhs = ||w^b d_x^n f|| and rhs_unit =
    ||J^n (w^b f)||; the ratio is bounded uniformly in the plateau width.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    if b <= 0:
        raise ValueError(f"b must be positive, got {b}")
    grid = f.grid
    fam = weights_mod.truncated_family(grid, _resolve_plateau(grid, n_plateau))
    wb = fam.power_derivative(float(b), 0)
    lhs = _trapezoid_l2(grid, derivative(f, n).samples * wb)
    rhs = _spectral_l2(grid, np.fft.fft(wb * f.samples), float(n))
    return float(lhs), float(rhs)


def pointwise_formula_residual(
    u0: RealField, r: float, t: float, n_plateau: int | None = None
) -> tuple[float, float]:
    """Commutator of the free group with the fractional weight.

    residual = || m * W(t)u0 - W(t)(m * u0) ||_L2 with m = w_N^r - 1, and
    bound_unit = (1 + |t|) (||u0|| + || |xi|^{4r} u0 ||); the ratio is
    bounded by a constant depending only on r.
    """
    if not 0.0 < r < 1.0:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    grid = u0.grid
    m = origin_vanishing_weight(grid, r, n_plateau)
    propagated = free_propagate(u0, t)
    weighted_first = free_propagate(RealField(grid, m * u0.samples), t)
    residual = _trapezoid_l2(grid, m * propagated.samples - weighted_first.samples)
    hat = np.fft.fft(u0.samples)
    bound_unit = (1.0 + abs(t)) * (
        float(_spectral_l2(grid, hat))
        + float(_spectral_l2(grid, np.abs(grid.xi) ** (4.0 * r) * hat))
    )
    return float(residual), float(bound_unit)


def weighted_energy_residual(
    traj: Trajectory, r: float, k: int, n_plateau: int | None = None
) -> float:
    """Defect of the weighted energy balance along a trajectory.

    With p = w_N^{2r}, a solution satisfies
        d/dt (p u, u) = 5 (p' u_xx, u_xx) - 5 (p''' u_x, u_x)
                        + (p^(5) u, u) + 2/(k+2) (p' u^{k+2}, 1).
    The time derivative is a centered difference on the trajectory grid
    (endpoints excluded); the sup over interior times of |LHS - RHS| is
    normalized by max(sup|RHS|, (p u, u)(0) / t-span) so the p == 1 case,
    whose RHS vanishes identically, degrades to the relative drift rate of
    the quadratic invariant.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    grid = traj.grid
    h = traj.step()
    if traj.nt < 2:
        raise ValueError("need at least three snapshots for centered differences")
    fam = weights_mod.truncated_family(grid, _resolve_plateau(grid, n_plateau))
    p0 = fam.power_derivative(2.0 * r, 0)
    p1 = fam.power_derivative(2.0 * r, 1)
    p3 = fam.power_derivative(2.0 * r, 3)
    p5 = fam.power_derivative(2.0 * r, 5)

    u = traj.states
    hats = np.fft.fft(u, axis=1)
    ux = np.fft.ifft(hats * (1j * grid.xi_odd), axis=1).real
    uxx = np.fft.ifft(hats * -(grid.xi**2), axis=1).real

    dx = grid.dx
    energy = dx * np.sum(p0 * u**2, axis=1)
    rhs = (
        5.0 * dx * np.sum(p1 * uxx**2, axis=1)
        - 5.0 * dx * np.sum(p3 * ux**2, axis=1)
        + dx * np.sum(p5 * u**2, axis=1)
        + (2.0 / (k + 2.0)) * dx * np.sum(p1 * u ** (k + 2), axis=1)
    )
    lhs = (energy[2:] - energy[:-2]) / (2.0 * h)
    defect = np.max(np.abs(lhs - rhs[1:-1]))
    span = traj.times[-1] - traj.times[0]
    denom = max(np.max(np.abs(rhs)), energy[0] / span)
    if denom == 0.0:
        return 0.0 if defect == 0.0 else math.inf
    return float(defect / denom)


def apriori_h2_bound(
    traj: Trajectory, k: int, fit_constant: float | None = None
) -> tuple[float, float]:
    """(sup_t ||u(t)||^2_{H^2},  K(u0)) for the a priori energy bound.

    K uses the calibrated constant (fit once, frozen) in
      k=1:  K = C (z + z^{3/2} + z^2),  z = ||u0||^2_{H^2};
      k=2:  K = C z^2 + z.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    if fit_constant is None:
        from .calibration import load_calibration

        fit_constant = load_calibration()["constants"][f"apriori_k{k}_C"]
    hats = np.fft.fft(traj.states, axis=1)
    max_h2_sq = float((_spectral_l2(traj.grid, hats, 2.0) ** 2).max())
    z = float(_spectral_l2(traj.grid, hats[0], 2.0) ** 2)
    if k == 1:
        bound = fit_constant * (z + z**1.5 + z**2)
    else:
        bound = fit_constant * z**2 + z
    return max_h2_sq, float(bound)


def second_derivative_energy_bound(traj: Trajectory) -> tuple[float, float]:
    """Constant-free cubic-case bound: (sup_t int (u_xx)^2,
    (1/6) int u0^4 + int (u0_xx)^2).

    From conservation of (1/12) int u^4 + (1/2) int u_xx^2 and positivity
    of int u^4, the left side never exceeds the right on a converged k=2
    run; no fitted constant enters.
    """
    grid = traj.grid
    hats = np.fft.fft(traj.states, axis=1)
    uxx = np.fft.ifft(hats * -(grid.xi**2), axis=1).real
    energies = grid.dx * np.sum(uxx**2, axis=1)
    u0 = traj.states[0]
    rhs = grid.dx * np.sum(u0**4) / 6.0 + float(energies[0])
    return float(energies.max()), float(rhs)


def free_trajectory(u0: RealField, T: float, nt: int) -> Trajectory:
    """Exact linear evolution sampled on a uniform time grid."""
    times = np.linspace(0.0, float(T), int(nt) + 1)
    u0hat = np.fft.fft(u0.samples)
    states = np.array(
        [np.fft.ifft(u0.grid.free_phase(t) * u0hat).real for t in times]
    )
    return Trajectory(u0.grid, times, states, {"scheme": "free", "nonlinear": False})


def smoothing_ratio(u0: RealField, T: float, nt: int = 64) -> float:
    """Gain-of-two-derivatives probe for the free group:
    || d_x^2 W(t) u0 ||_{L^inf_x L^2_T} / ||u0||_{L^2}."""
    denom = sobolev_norm(u0, 0.0)
    if denom == 0.0:
        raise ValueError("u0 must be nonzero")
    numer = mixed_spacetime_norm(
        free_trajectory(u0, T, nt), NormSpec(math.inf, 2.0, prefix="dx2")
    )
    return numer / denom


@dataclass
class DiagnosticsReport:
    """Time series plus inequality-check records for one run."""

    times: np.ndarray
    series: dict[str, np.ndarray]
    checks: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_check(self, name: str, lhs: float, rhs: float):
        ratio = lhs / rhs if rhs != 0.0 else math.inf if lhs else 0.0
        self.checks.append({"name": name, "lhs": lhs, "rhs": rhs, "ratio": ratio})

    def validate(self):
        for key, col in self.series.items():
            if key.startswith("lambda5"):
                continue
            if not np.all(np.isfinite(col)):
                raise ValueError(f"series column {key!r} has non-finite entries")


def build_report(
    traj: Trajectory,
    r: float,
    k: int,
    rho: float = 1.0,
    n_plateau: int | None = None,
    s_target: float | None = None,
) -> DiagnosticsReport:
    """Standard per-snapshot series: invariants, norms, contraction norms."""
    grid = traj.grid
    hats = np.fft.fft(traj.states, axis=1)
    if s_target is None:
        s_target = 4.0 * r if k == 1 else 2.0
    n_res = _resolve_plateau(grid, n_plateau)
    fam = weights_mod.truncated_family(grid, n_res)
    w2r = fam.power_derivative(2.0 * float(r), 0)

    i1 = np.empty(traj.times.size)
    i2 = np.empty(traj.times.size)
    for i in range(traj.times.size):
        i1[i], i2[i] = conserved_quantities(traj.field(i), k)
    series = {
        "I1": i1,
        "I2": i2,
        "H2": _spectral_l2(grid, hats, 2.0),
        "Hs_target": _spectral_l2(grid, hats, float(s_target)),
        "weighted_r": _trapezoid_l2(grid, traj.states, w2r),
    }
    series.update(lambda_norm_series(traj, r, k, rho, n_res))
    report = DiagnosticsReport(times=traj.times, series=series, meta={"k": k, "r": r, "rho": rho, "N": n_res, "s_target": s_target})
    report.validate()
    return report
