"""Exact steady states and critical heating curves of the reduced models.

Radial model (insulated electrodes)::

    theta(r) = -2 ln(c - b + b r^2),   b = beta c (-ln c) / 2

with ``lambda = 8 b (c - b)`` under voltage control and
``lambda I^2 = 4 beta (-ln c) / (c^2 (1 + beta ln c / 2))`` under current
control.

Axial model (insulated sides)::

    theta(z) = 2 ln(cos(a z) / cos(a/2)) + b,   b = (2a/alpha) tan(a/2)

with ``Lambda = 8 exp(-b) sin^2(a/2)`` (voltage) or
``Lambda I^2 = 2 a^2 exp(b) / cos^2(a/2)`` (current).

Radial states are parametrized internally by ``x = -ln c`` which keeps the
current-controlled branch well conditioned when ``c`` approaches
``exp(-2/beta)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import solve_bvp
from scipy.optimize import brentq, minimize_scalar

from .model import DimensionlessGroups

__all__ = [
    "AxialSteadyState",
    "Branch",
    "ContinuationError",
    "LumpedCriterion",
    "RadialSteadyState",
    "axial_critical_lambda",
    "axial_steady_current",
    "axial_steady_voltage",
    "evaluate_profile",
    "high_aspect_critical",
    "lumped_flash_criterion",
    "radial_critical_lambda",
    "radial_steady_current",
    "radial_steady_voltage",
]

_XTOL = 1e-15
_RTOL = 4 * np.finfo(float).eps


class Branch(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    CURRENT_CONTROLLED = "current_controlled"


class ContinuationError(RuntimeError):
    """Fold tracing broke down; ``last_lambda`` is the last converged value."""

    def __init__(self, message: str, last_lambda: float | None = None):
        super().__init__(message)
        self.last_lambda = last_lambda


@dataclass(frozen=True)
class RadialSteadyState:
    c: float
    b: float
    beta: float
    forcing: float
    branch: Branch

    @property
    def theta_center(self) -> float:
        return -2.0 * math.log(self.c - self.b)

    @property
    def theta_surface(self) -> float:
        return -2.0 * math.log(self.c)


@dataclass(frozen=True)
class AxialSteadyState:
    a: float
    b: float
    alpha: float
    forcing: float
    branch: Branch

    @property
    def theta_center(self) -> float:
        return self.b - 2.0 * math.log(math.cos(0.5 * self.a))

    @property
    def theta_end(self) -> float:
        return self.b


# --------------------------------------------------------------------------
# radial model

def _radial_voltage_forcing(x, beta):
    """lambda as a function of x = -ln c."""
    return 4.0 * beta * np.exp(-2.0 * x) * x * (1.0 - 0.5 * beta * x)


def _radial_current_forcing(x, beta):
    """lambda I^2 as a function of x = -ln c, for 0 <= x < 2/beta."""
    return 4.0 * beta * x * np.exp(2.0 * x) / (1.0 - 0.5 * beta * x)


def _radial_fold_x(beta: float) -> float:
    # stationary point of x exp(-2x) (1 - beta x / 2): beta x^2 - (beta+2) x + 1 = 0
    s = beta + 2.0
    return 2.0 / (s + math.sqrt(s * s - 4.0 * beta))


def _radial_state(x: float, beta: float, forcing: float, branch: Branch) -> RadialSteadyState:
    c = math.exp(-x)
    return RadialSteadyState(c=c, b=0.5 * beta * c * x, beta=beta, forcing=forcing, branch=branch)


def radial_critical_lambda(beta: float) -> float:
    """Largest lambda for which the voltage-controlled radial problem has a
    steady state.  Returns 0 for ``beta = 0`` (no steady state for any
    positive heating)."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if beta == 0.0:
        return 0.0
    if math.isinf(beta):
        return 2.0
    return float(_radial_voltage_forcing(_radial_fold_x(beta), beta))


def radial_steady_voltage(lambda_: float, beta: float) -> list[RadialSteadyState]:
    """All steady states of the voltage-controlled radial problem.

    Ordered stable (larger ``c``) first.  An empty list means no steady state
    exists, i.e. the solution blows up.
    """
    if lambda_ < 0 or not beta > 0:
        raise ValueError("need lambda >= 0 and beta > 0")
    if lambda_ == 0.0:
        return [RadialSteadyState(c=1.0, b=0.0, beta=beta, forcing=0.0, branch=Branch.STABLE)]
    x_star = _radial_fold_x(beta)
    lam_c = float(_radial_voltage_forcing(x_star, beta))
    if lambda_ > lam_c * (1.0 + 1e-12):
        return []
    if lambda_ >= lam_c * (1.0 - 1e-12):
        return [_radial_state(x_star, beta, lambda_, Branch.STABLE)]

    def resid(x):
        return _radial_voltage_forcing(x, beta) - lambda_

    x_lo = brentq(resid, 0.0, x_star, xtol=_XTOL, rtol=_RTOL)
    x_hi = brentq(resid, x_star, 2.0 / beta, xtol=_XTOL, rtol=_RTOL)
    return [
        _radial_state(x_lo, beta, lambda_, Branch.STABLE),
        _radial_state(x_hi, beta, lambda_, Branch.UNSTABLE),
    ]


def radial_steady_current(lambdaI2: float, beta: float) -> RadialSteadyState:
    """The unique steady state of the current-controlled radial problem."""
    if not (lambdaI2 > 0 and beta > 0):
        raise ValueError("need lambdaI2 > 0 and beta > 0")
    x_max = 2.0 / beta

    def resid(x):
        return _radial_current_forcing(x, beta) - lambdaI2

    hi = x_max
    # the forcing diverges at x_max; step in from it until the sign is positive
    for k in range(1, 60):
        hi = x_max * (1.0 - 2.0**-k)
        if resid(hi) > 0:
            break
    else:  # pragma: no cover - only for absurd forcing
        hi = math.nextafter(x_max, 0.0)
    if not resid(hi) > 0:
        raise ValueError(f"forcing {lambdaI2!r} beyond representable range")
    x = brentq(resid, 0.0, hi, xtol=_XTOL, rtol=_RTOL)
    return _radial_state(x, beta, lambdaI2, Branch.CURRENT_CONTROLLED)


# --------------------------------------------------------------------------
# axial model

def _axial_b(a, alpha):
    if math.isinf(alpha):
        return np.zeros_like(np.asarray(a, dtype=float)) if np.ndim(a) else 0.0
    return (2.0 * a / alpha) * np.tan(0.5 * a)


def _axial_voltage_forcing(a, alpha):
    return 8.0 * np.exp(-_axial_b(a, alpha)) * np.sin(0.5 * a) ** 2


def _axial_current_forcing(a, alpha):
    return 2.0 * a**2 * np.exp(_axial_b(a, alpha)) / np.cos(0.5 * a) ** 2


def _axial_fold_a(alpha: float) -> float:
    # d/da ln(Lambda) = cot(a/2) - b'(a) = 0
    def dlog(a):
        h = 0.5 * a
        return 1.0 / math.tan(h) - (2.0 / alpha) * (math.tan(h) + h / math.cos(h) ** 2)

    return brentq(dlog, 1e-300, math.pi * (1.0 - 1e-16), xtol=_XTOL, rtol=_RTOL)


def axial_critical_lambda(alpha: float) -> float:
    """Largest ``Lambda = lambda/delta^2`` with a voltage-controlled axial
    steady state.  ``alpha = inf`` (ends held at furnace temperature) gives 8;
    ``alpha = 0`` gives 0."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if alpha == 0.0:
        return 0.0
    if math.isinf(alpha):
        return 8.0
    return float(_axial_voltage_forcing(_axial_fold_a(alpha), alpha))


def _axial_state(a: float, alpha: float, forcing: float, branch: Branch) -> AxialSteadyState:
    return AxialSteadyState(a=a, b=float(_axial_b(a, alpha)), alpha=alpha, forcing=forcing, branch=branch)


def axial_steady_voltage(Lambda: float, alpha: float) -> list[AxialSteadyState]:
    """Steady states of the voltage-controlled axial problem (stable first)."""
    if Lambda < 0 or not alpha > 0:
        raise ValueError("need Lambda >= 0 and alpha > 0")
    if Lambda == 0.0:
        return [AxialSteadyState(a=0.0, b=0.0, alpha=alpha, forcing=0.0, branch=Branch.STABLE)]

    def resid(a):
        return _axial_voltage_forcing(a, alpha) - Lambda

    if math.isinf(alpha):
        # monotone in a: a single root, no fold below 8
        if Lambda >= 8.0:
            return []
        a = brentq(resid, 0.0, math.pi, xtol=_XTOL, rtol=_RTOL)
        return [_axial_state(a, alpha, Lambda, Branch.STABLE)]
    a_star = _axial_fold_a(alpha)
    lam_c = float(_axial_voltage_forcing(a_star, alpha))
    if Lambda > lam_c * (1.0 + 1e-12):
        return []
    if Lambda >= lam_c * (1.0 - 1e-12):
        return [_axial_state(a_star, alpha, Lambda, Branch.STABLE)]
    a_lo = brentq(resid, 0.0, a_star, xtol=_XTOL, rtol=_RTOL)
    # Lambda(a) -> 0 as a -> pi since b -> inf
    hi = math.pi
    for k in range(1, 80):
        hi = math.pi * (1.0 - 2.0**-k)
        if resid(hi) < 0:
            break
    a_hi = brentq(resid, a_star, hi, xtol=_XTOL, rtol=_RTOL)
    return [
        _axial_state(a_lo, alpha, Lambda, Branch.STABLE),
        _axial_state(a_hi, alpha, Lambda, Branch.UNSTABLE),
    ]


def axial_steady_current(LambdaI2: float, alpha: float) -> AxialSteadyState:
    """The unique steady state of the current-controlled axial problem."""
    if not (LambdaI2 > 0 and alpha > 0):
        raise ValueError("need LambdaI2 > 0 and alpha > 0")

    def resid(a):
        return _axial_current_forcing(a, alpha) - LambdaI2

    hi = math.pi
    for k in range(1, 80):
        hi = math.pi * (1.0 - 2.0**-k)
        if resid(hi) > 0:
            break
    else:  # pragma: no cover
        raise ValueError(f"forcing {LambdaI2!r} beyond representable range")
    a = brentq(resid, 0.0, hi, xtol=_XTOL, rtol=_RTOL)
    return _axial_state(a, alpha, LambdaI2, Branch.CURRENT_CONTROLLED)


def evaluate_profile(state: RadialSteadyState | AxialSteadyState, coords: Sequence[float]) -> np.ndarray:
    """Temperature of an exact steady state at the given positions.

    Radial positions must lie in [0, 1], axial ones in [-1/2, 1/2].
    """
    x = np.asarray(coords, dtype=float)
    if isinstance(state, RadialSteadyState):
        if np.any((x < 0.0) | (x > 1.0)):
            raise ValueError("radial coordinates must lie in [0, 1]")
        return -2.0 * np.log(state.c - state.b + state.b * x**2)
    if isinstance(state, AxialSteadyState):
        if np.any(np.abs(x) > 0.5):
            raise ValueError("axial coordinates must lie in [-1/2, 1/2]")
        return 2.0 * np.log(np.cos(state.a * x) / math.cos(0.5 * state.a)) + state.b
    raise TypeError(f"not a steady state: {type(state).__name__}")


# --------------------------------------------------------------------------
# lumped model

@dataclass(frozen=True)
class LumpedCriterion:
    flash: bool
    margin: float
    threshold: float


def lumped_flash_criterion(groups: DimensionlessGroups) -> LumpedCriterion:
    """Tangency criterion ``lambda > (2/e)(beta + delta^2 alpha)``."""
    threshold = (2.0 / math.e) * (groups.beta + groups.delta**2 * groups.alpha)
    margin = groups.lambda_ - threshold
    return LumpedCriterion(flash=margin > 0.0, margin=margin, threshold=threshold)


# --------------------------------------------------------------------------
# high-aspect-ratio model

class _CentreContinuation:
    """Steady states of ``theta'' + mu exp(-theta) - B theta = 0`` on
    [0, 1/2] with ``theta'(0) = 0`` and a Robin (or Dirichlet) end,
    parametrized by the centre value ``theta(0)``.

    ``mu`` stands for ``Lambda / (int exp(-theta))^2``; it is carried as the
    free parameter of a collocation solve, so ``Lambda = mu K^2`` follows
    from each converged profile without any iteration on the integral.
    Converged profiles seed the next solve.
    """

    def __init__(self, alpha: float, B: float):
        self.alpha = alpha
        self.B = B
        self.solutions: dict[float, tuple[np.ndarray, np.ndarray, float]] = {}

    def _fun(self, z, y, p):
        e = np.exp(-y[0])
        return np.vstack([y[1], self.B * y[0] - p[0] * e, e])

    def _bc(self, theta0):
        alpha = self.alpha

        def bc(ya, yb, p):
            end = yb[0] if math.isinf(alpha) else yb[1] + alpha * yb[0]
            return np.array([ya[0] - theta0, ya[1], end, ya[2]])

        return bc

    def _initial_guess(self, theta0):
        z = np.linspace(0.0, 0.5, 41)
        if math.isinf(self.alpha):
            theta = theta0 * (1.0 - 4.0 * z**2)
            mu = 8.0 * theta0 + self.B * theta0
        else:
            theta = np.full_like(z, theta0)
            mu = (2.0 * self.alpha + self.B) * theta0 * math.exp(theta0)
        dtheta = np.gradient(theta, z)
        return z, np.vstack([theta, dtheta, np.cumsum(np.exp(-theta)) * (z[1] - z[0])]), mu

    def _guess(self, theta0):
        if not self.solutions:
            return self._initial_guess(theta0)
        nearest = min(self.solutions, key=lambda t: abs(math.log(t / theta0)))
        z_old, y_old, mu = self.solutions[nearest]
        # re-mesh so that refinement does not accumulate along the branch
        z = np.linspace(0.0, 0.5, 201)
        y = np.vstack([np.interp(z, z_old, row) for row in y_old])
        scale = theta0 / nearest
        y[0] *= scale
        y[1] *= scale
        return z, y, mu

    def lambda_at(self, theta0: float) -> float:
        z, y, mu = self._guess(theta0)
        sol = solve_bvp(
            self._fun, self._bc(theta0), z, y, p=[mu], tol=1e-7, bc_tol=1e-10, max_nodes=50000
        )
        if not sol.success or not sol.p[0] > 0:
            raise ContinuationError(f"steady solve failed at centre value {theta0:.6g}: {sol.message}")
        self.solutions[theta0] = (sol.x, sol.y, float(sol.p[0]))
        K = 2.0 * sol.y[2, -1]
        return float(sol.p[0]) * K * K


def high_aspect_critical(alpha: float, B: float, theta0_max: float = 40.0, step: float = 1.25) -> float:
    """Fold value of Lambda for the slender-sample voltage-controlled model.

    Steady states are traced by their centre temperature from near zero
    upward; the largest Lambda along the branch is refined by bounded scalar
    maximization.  Raises :class:`ContinuationError` (carrying the last
    converged Lambda) if a solve fails before the fold is passed.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive (or inf)")
    if B < 0:
        raise ValueError("B must be non-negative")
    if math.isinf(alpha) and B == 0.0:
        return axial_critical_lambda(alpha)
    branch = _CentreContinuation(alpha, B)
    thetas: list[float] = []
    values: list[float] = []
    theta0 = 1e-2
    h = step
    while theta0 <= theta0_max:
        try:
            lam = branch.lambda_at(theta0)
        except ContinuationError as exc:
            if h > 1.0 + 1e-3 and thetas:
                # retry closer to the last converged point
                h = 1.0 + 0.5 * (h - 1.0)
                theta0 = thetas[-1] * h
                continue
            raise ContinuationError(str(exc), last_lambda=values[-1] if values else None) from exc
        thetas.append(theta0)
        values.append(lam)
        k = int(np.argmax(values))
        if k < len(values) - 2 and lam < 0.9 * values[k]:
            break
        h = step
        theta0 *= h
    k = int(np.argmax(values))
    if k >= len(values) - 1:
        raise ContinuationError(
            f"no fold found for centre temperatures up to {thetas[-1]:.3g}", last_lambda=values[-1]
        )
    lo = thetas[max(k - 1, 0)]
    hi = thetas[k + 1]
    res = minimize_scalar(
        lambda t: -branch.lambda_at(t), bounds=(lo, hi), method="bounded", options={"xatol": 1e-7 * hi}
    )
    return float(max(-res.fun, values[k]))
