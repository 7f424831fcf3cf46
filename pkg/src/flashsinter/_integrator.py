"""Adaptive TR-BDF2 time stepping for banded systems with one non-local term.

The semi-discrete systems solved here have the form ``y' = f(y)`` whose
Jacobian is banded (two sub- and super-diagonals) plus one rank-one term
``u g^T`` coming from a source amplitude that depends on an integral of the
solution.  Newton matrices are factorized as banded matrices and the
rank-one term is folded in with the Sherman-Morrison formula, so every
linear solve costs two banded back-substitutions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.linalg import solve_banded

GAMMA = 2.0 - math.sqrt(2.0)
_D = GAMMA / 2.0  # trapezoid stage coefficient
_W = (1.0 - GAMMA) / (2.0 - GAMMA)  # BDF2 stage coefficient
_BDF_A = 1.0 / (GAMMA * (2.0 - GAMMA))
_BDF_B = (1.0 - GAMMA) ** 2 / (GAMMA * (2.0 - GAMMA))
_ERR_K = (3.0 * GAMMA**2 - 4.0 * GAMMA + 2.0) / (6.0 * (2.0 - GAMMA))

BANDS = (2, 2)


class StepFailure(Exception):
    """Newton iteration did not converge or produced non-finite values."""


class SemiDiscrete(Protocol):
    def rhs(self, y: np.ndarray, mode: str) -> np.ndarray: ...

    def jacobian(self, y: np.ndarray, mode: str) -> tuple[np.ndarray, np.ndarray | None, np.ndarray | None]:
        """Banded part in ``solve_banded`` (2, 2) layout plus the rank-one
        factors ``u, g`` (or ``None``) with ``J = band + u g^T``."""
        ...


def banded_from_diagonals(main, lower1=None, lower2=None, upper1=None, upper2=None) -> np.ndarray:
    """Assemble (2, 2) banded storage.  ``lower1[i]`` is entry (i+1, i),
    ``upper1[i]`` is entry (i, i+1), and similarly for the second bands."""
    n = len(main)
    ab = np.zeros((5, n))
    ab[2] = main
    if upper2 is not None:
        ab[0, 2:] = upper2
    if upper1 is not None:
        ab[1, 1:] = upper1
    if lower1 is not None:
        ab[3, :-1] = lower1
    if lower2 is not None:
        ab[4, :-2] = lower2
    return ab


def banded_matvec(ab: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = len(y)
    out = ab[2] * y
    if n > 1:
        out[:-1] += ab[1, 1:] * y[1:]
        out[1:] += ab[3, :-1] * y[:-1]
    if n > 2:
        out[:-2] += ab[0, 2:] * y[2:]
        out[2:] += ab[4, :-2] * y[:-2]
    return out


def _solve_shifted(ab, u, g, scale, rhs):
    """Solve ``(I - scale*(band + u g^T)) x = rhs``."""
    m = -scale * ab
    m[2] += 1.0
    x = solve_banded(BANDS, m, rhs, check_finite=False)
    if u is None:
        return x
    z = solve_banded(BANDS, m, u, check_finite=False)
    denom = 1.0 - scale * float(g @ z)
    if denom == 0.0 or not math.isfinite(denom):
        raise StepFailure("singular non-local Newton correction")
    return x + z * (scale * float(g @ x) / denom)


@dataclass
class StepResult:
    y: np.ndarray
    error: float
    dy: np.ndarray  # increment y - y_old, for compensated accumulation


class TRBDF2:
    """One-step L-stable second-order scheme with an embedded third-order
    error estimate (Hosea & Shampine form), filtered through the stage
    Newton matrix for stiff components.

    Both stages are solved for increments from the step start, which keeps
    rounding in the state update at the level of one addition per step.
    """

    def __init__(self, model: SemiDiscrete, rel_tol: float, abs_tol: float, max_newton: int = 12):
        self.model = model
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.max_newton = max_newton

    def _wrms(self, v, scale):
        return float(np.sqrt(np.mean((v / scale) ** 2)))

    def _newton(self, y0, guess, rhs_const, c, mode, scale):
        """Solve ``d = c f(y0 + d) + rhs_const`` for the increment ``d``."""
        d = guess.copy()
        f_eval = self.model.rhs
        for _ in range(self.max_newton):
            y = y0 + d
            resid = d - c * f_eval(y, mode) - rhs_const
            if not np.all(np.isfinite(resid)):
                raise StepFailure("non-finite residual")
            ab, u, g = self.model.jacobian(y, mode)
            delta = _solve_shifted(ab, u, g, c, -resid)
            d = d + delta
            if not np.all(np.isfinite(d)):
                raise StepFailure("non-finite Newton iterate")
            if self._wrms(delta, scale) <= 1e-3 or np.max(np.abs(delta)) <= 1e-14 * (1.0 + np.max(np.abs(y0 + d))):
                return d
        raise StepFailure("Newton iteration did not converge")

    def step(self, y, f0, h, mode) -> StepResult:
        scale = self.abs_tol + self.rel_tol * np.abs(y)
        # trapezoid stage to t + gamma h
        c_g = _D * h * f0
        dg = self._newton(y, GAMMA * h * f0, c_g, _D * h, mode, scale)
        fg = (dg - c_g) / (_D * h)
        # BDF2 stage to t + h; _BDF_A - _BDF_B = 1 turns it into increment form
        c_1 = _BDF_A * dg
        d1 = self._newton(y, dg + (1.0 - GAMMA) * h * fg, c_1, _W * h, mode, scale)
        f1 = (d1 - c_1) / (_W * h)
        y1 = y + d1
        est = _ERR_K * h * (f0 / GAMMA - fg / (GAMMA * (1.0 - GAMMA)) + f1 / (1.0 - GAMMA))
        ab, u, g = self.model.jacobian(y1, mode)
        est = _solve_shifted(ab, u, g, _D * h, est)
        err_scale = self.abs_tol + self.rel_tol * np.maximum(np.abs(y), np.abs(y1))
        return StepResult(y=y1, error=self._wrms(est, err_scale), dy=d1)


def next_step_factor(error: float) -> float:
    if error == 0.0:
        return 4.0
    return min(4.0, max(0.2, 0.9 * error ** (-1.0 / 3.0)))
