"""Sampled weight functions with closed-form derivatives.

Three families, each sampled together with derivatives up to order five:

* smooth bracket powers  (1 + x^2)^r  on the whole line;
* even plateau weights: equal to sqrt(1 + x^2) for |x| <= N, constant 2N
  once sqrt(1 + x^2) reaches 2N, non-decreasing in |x|, with derivative
  bounds |w^(j)| <= c_j / w^(j-1) uniform in N;
* odd transition weights: vanish at 0, equal (1 + x^2)^beta - 1 on [0, N]
  (beta = alpha + 1/2 for the primary variant, beta = alpha for the
  derivative variant), constant (2 N^2)^beta well before 10N, extended to
  x < 0 as odd functions.

Transition profiles (any conforming C^5-or-better choice is admissible;
these are picked so the measured bound constants are N-uniform):

* the even plateau weight and the derivative-variant odd weight blend
  values with the C-infinity step sigma(s) = psi(s)/(psi(s) + psi(1-s)),
  psi(s) = exp(-1/s), over a zone on which the rising branch stays at or
  below the plateau value, so the blend is monotone by construction;
* the primary odd weight rides its own rising branch through a warped
  coordinate, phi = g(q(x)) with q' = 1 - (order-11 polynomial smoothstep),
  giving a C^6 weight whose derivative maxima sit near the origin rather
  than in the (N-dependent) transition zone.

All derivatives come from symbolic differentiation of the defining
expressions (never finite differences).  Inside a sliver of width 1% of an
exponential-blend zone the blend is indistinguishable from its neighbors
at double precision (exp(-100) scale), so sampling snaps to the neighbor
expressions there to avoid 0*inf at the zone endpoints.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import sympy as sp

from .errors import DomainTooSmallError
from .grid import Grid

__all__ = [
    "WeightFamily",
    "smooth_family",
    "truncated_family",
    "odd_family",
    "smooth_weight",
    "truncated_weight",
    "odd_weight",
    "default_plateau_n",
    "verify_weight_bounds",
    "MAX_WEIGHT_DERIVATIVE",
    "ODD_VARIANTS",
]

MAX_WEIGHT_DERIVATIVE = 5
ODD_VARIANTS = ("primary", "derivative")

# Fraction of a transition zone snapped to the neighboring closed forms.
_EDGE_MARGIN = 0.01

_X = sp.Symbol("x", real=True)


def _smooth_step(s):
    """C-infinity step in the sympy expression s: 0 at s<=0, 1 at s>=1."""
    psi_lo = sp.exp(-1 / s)
    psi_hi = sp.exp(-1 / (1 - s))
    return psi_lo / (psi_lo + psi_hi)


def _blend(a: float, b: float, rising, plateau):
    sigma = _smooth_step((_X - a) / (b - a))
    return (1 - sigma) * rising + sigma * plateau


@lru_cache(maxsize=None)
def _lambdified(expr, power: float, order: int):
    """Grid-independent compiled derivative of expr**power."""
    e = expr if power == 1 else expr**power
    return sp.lambdify(_X, sp.diff(e, _X, order), modules="numpy")


_S = sp.Symbol("s", real=True)


def _poly_step(k: int):
    """Polynomial smoothstep on [0, 1] with k matched derivatives per end."""
    acc = sp.Integer(0)
    for i in range(k + 1):
        acc += sp.binomial(k + i, i) * sp.binomial(2 * k + 1, k - i) * (-_S) ** i
    return sp.expand(_S ** (k + 1) * acc)


def _warp(a: float, width: float, rising):
    """rising(q(x)) with q' = 1 - smoothstep((x-a)/width).

    q is the identity to all matched orders at a and constant a + width/2
    beyond a + width, so the composite continues ``rising`` smoothly, is
    non-decreasing, and plateaus at rising(a + width/2).
    """
    qs = sp.integrate(1 - _poly_step(5), (_S, 0, _S))
    q = a + width * qs.subs(_S, (_X - a) / width)
    return rising.subs(_X, q)


class WeightFamily:
    """One weight sampled on a grid, with analytic derivatives to order 5.

    The weight is defined by closed-form pieces on [0, inf) plus a parity
    (+1 even, -1 odd).  ``power_derivative`` differentiates weight**p
    symbolically, which diagnostics use for powers like w^(2r).
    """

    def __init__(self, grid: Grid, kind: str, pieces, parity: int, params: dict):
        self.grid = grid
        self.kind = kind
        self.parity = parity
        self.params = dict(params)
        self._pieces = tuple(pieces)
        self._samples: dict = {}

    def _piece_functions(self, power: float, order: int):
        return tuple(
            _lambdified(expr, power, order) for _, _, expr in self._pieces
        )

    def power_derivative(self, power: float, order: int = 0) -> np.ndarray:
        """Samples of d^order/dx^order of weight**power on the grid."""
        if order != int(order) or order < 0:
            raise ValueError(f"derivative order must be a nonnegative integer, got {order!r}")
        order = int(order)
        if order > MAX_WEIGHT_DERIVATIVE:
            raise ValueError(
                f"weight derivatives are capped at order {MAX_WEIGHT_DERIVATIVE}, got {order}"
            )
        power = float(power)
        if power != 1.0 and self.parity < 0:
            raise ValueError("powers of odd weights are not defined")
        key = (power, order)
        if key in self._samples:
            return self._samples[key]

        x = self.grid.x
        y = np.abs(x)
        out = np.empty_like(y)
        fns = self._piece_functions(power, order)
        for (lo, hi, _), fn in zip(self._pieces, fns):
            m = (y >= lo) & (y < hi)
            if np.any(m):
                out[m] = np.broadcast_to(np.asarray(fn(y[m]), dtype=np.float64), y[m].shape)

        neg = x < 0
        if self.parity > 0:
            if order % 2:
                out[neg] = -out[neg]
        else:
            if order % 2 == 0:
                out[neg] = -out[neg]
                # The odd extension's even-order derivatives jump at 0;
                # sample the odd-symmetric (zero) value there.
                out[x == 0.0] = 0.0

        out.setflags(write=False)
        self._samples[key] = out
        return out

    def derivative(self, order: int = 0) -> np.ndarray:
        """Samples of the order-th derivative of the weight itself."""
        return self.power_derivative(1.0, order)


def smooth_family(grid: Grid) -> WeightFamily:
    """The bracket sqrt(1 + x^2); powers give (1 + x^2)^(p/2)."""
    return _smooth_family_cached(grid)


@lru_cache(maxsize=None)
def _smooth_family_cached(grid: Grid) -> WeightFamily:
    pieces = ((0.0, math.inf, sp.sqrt(1 + _X**2)),)
    return WeightFamily(grid, "smooth", pieces, +1, {})


def _check_plateau_fits(grid: Grid, span: float, n_plateau: int):
    if span >= 0.9 * grid.half_width:
        raise DomainTooSmallError(
            f"weight with N={n_plateau} needs {span:g} < 0.9*L = {0.9 * grid.half_width:g}"
        )


def _check_n(n_plateau: int) -> int:
    if n_plateau != int(n_plateau) or n_plateau < 1:
        raise ValueError(f"N must be a positive integer, got {n_plateau!r}")
    return int(n_plateau)


def truncated_family(grid: Grid, n_plateau: int) -> WeightFamily:
    """Even weight: sqrt(1+x^2) up to N, constant 2N from sqrt(4N^2-1) on."""
    n_plateau = _check_n(n_plateau)
    _check_plateau_fits(grid, 3.0 * n_plateau, n_plateau)
    return _truncated_family_cached(grid, n_plateau)


@lru_cache(maxsize=None)
def _truncated_family_cached(grid: Grid, n_plateau: int) -> WeightFamily:
    rising = sp.sqrt(1 + _X**2)
    plateau = sp.Integer(2 * n_plateau)
    a = float(n_plateau)
    b = math.sqrt(4.0 * n_plateau**2 - 1.0)  # where sqrt(1+x^2) == 2N
    d = _EDGE_MARGIN * (b - a)
    pieces = (
        (0.0, a + d, rising),
        (a + d, b - d, _blend(a, b, rising, plateau)),
        (b - d, math.inf, plateau),
    )
    return WeightFamily(grid, "truncated", pieces, +1, {"N": n_plateau})


def odd_family(grid: Grid, n_plateau: int, alpha: float, variant: str = "primary") -> WeightFamily:
    """Odd weight rising like (1+x^2)^beta - 1 and flat at (2N^2)^beta.

    variant "primary" uses beta = alpha + 1/2 (weights the solution);
    variant "derivative" uses beta = alpha (weights differentiated fields,
    and additionally has all five derivatives bounded uniformly in N).
    """
    n_plateau = _check_n(n_plateau)
    alpha = float(alpha)
    if not 0.0 < alpha <= 0.125:
        raise ValueError(f"alpha must lie in (0, 1/8], got {alpha}")
    if variant not in ODD_VARIANTS:
        raise ValueError(f"variant must be one of {ODD_VARIANTS}, got {variant!r}")
    _check_plateau_fits(grid, 10.0 * n_plateau, n_plateau)
    return _odd_family_cached(grid, n_plateau, alpha, variant)


@lru_cache(maxsize=None)
def _odd_family_cached(grid: Grid, n_plateau: int, alpha: float, variant: str) -> WeightFamily:
    beta = alpha + 0.5 if variant == "primary" else alpha
    beta_sym = sp.Float(beta, 17)
    rising = (1 + _X**2) ** beta_sym - 1
    plateau = sp.Integer(2 * n_plateau**2) ** beta_sym
    plateau_val = float((2.0 * n_plateau**2) ** beta)
    a = float(n_plateau)
    # Where the rising branch meets the plateau value.
    crossing = math.sqrt((plateau_val + 1.0) ** (1.0 / beta) - 1.0)
    if variant == "primary":
        # Ride the branch through a warped coordinate that freezes at the
        # crossing; the warp spans twice the remaining distance.
        width = 2.0 * (crossing - a)
        if a + width > 10.0 * n_plateau:
            raise ValueError(
                f"transition for N={n_plateau}, alpha={alpha} does not fit below 10N"
            )
        pieces = (
            (0.0, a, rising),
            (a, a + width, _warp(a, width, rising)),
            (a + width, math.inf, plateau),
        )
    else:
        # Value-blend toward the plateau; the branch stays below the plateau
        # up to the crossing, so capping the zone at min(crossing, 10N)
        # keeps the blend monotone and the weight constant beyond 10N.
        b = min(crossing, 10.0 * n_plateau)
        d = _EDGE_MARGIN * (b - a)
        pieces = (
            (0.0, a + d, rising),
            (a + d, b - d, _blend(a, b, rising, plateau)),
            (b - d, math.inf, plateau),
        )
    return WeightFamily(grid, f"odd_{variant}", pieces, -1, {"N": n_plateau, "alpha": alpha})


def smooth_weight(grid: Grid, r: float, j: int = 0) -> np.ndarray:
    """Samples of d^j/dx^j (1 + x^2)^r."""
    return smooth_family(grid).power_derivative(2.0 * float(r), j)


def truncated_weight(grid: Grid, n_plateau: int, j: int = 0) -> np.ndarray:
    """Samples of the j-th derivative of the plateau weight."""
    return truncated_family(grid, n_plateau).derivative(j)


def odd_weight(grid: Grid, n_plateau: int, alpha: float, variant: str = "primary", j: int = 0) -> np.ndarray:
    """Samples of the j-th derivative of an odd transition weight."""
    return odd_family(grid, n_plateau, alpha, variant).derivative(j)


def default_plateau_n(grid: Grid) -> int:
    """Widest admissible plateau: the 'smooth' bracket weight is realized as
    this truncation, since an unbounded weight is ill-defined at the seam."""
    n_plateau = int(math.floor(0.8 * grid.half_width / 3.0))
    if n_plateau < 1:
        raise DomainTooSmallError(
            f"box half-width {grid.half_width:g} leaves no room for a weight plateau"
        )
    return n_plateau


def verify_weight_bounds(grid: Grid, variant: str, n_list, j_list, alpha: float = 0.125) -> dict:
    """Measure the derivative-bound constants over the grid.

    For the truncated weight the constant is max |w^(j)| * w^(j-1) (the
    N-uniform bound shape); for odd variants it is max |w^(j)|.  Returns
    {(N, j): constant}; the table across N is the N-independence evidence.
    """
    if variant not in ("truncated",) + ODD_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    result = {}
    for n_plateau in n_list:
        if variant == "truncated":
            fam = truncated_family(grid, n_plateau)
        else:
            fam = odd_family(grid, n_plateau, alpha, variant)
        for j in j_list:
            if j < 1:
                raise ValueError("derivative bounds are defined for j >= 1")
            dj = fam.derivative(j)
            if variant == "truncated":
                w = fam.derivative(0)
                constant = float(np.max(np.abs(dj) * w ** (j - 1)))
            else:
                constant = float(np.max(np.abs(dj)))
            result[(int(n_plateau), int(j))] = constant
    return result
