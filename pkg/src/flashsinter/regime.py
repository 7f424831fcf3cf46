"""Dimensional flash criterion and (furnace temperature, field) regime maps.

Flash is predicted when the radial heating group exceeds its critical
value for the side-cooling group at the given furnace temperature::

    (R^2 A E / (k R_g T^2)) (V/L)^2 exp(-E / (R_g T))  >  lambda_c((R h_s + 4 R eps S T^3) / k)
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DimensionalParameters
from .steady import radial_critical_lambda

__all__ = ["FlashCheck", "RegimeGrid", "critical_field", "flash_condition", "regime_diagram"]


@dataclass(frozen=True)
class FlashCheck:
    flash: bool
    heating: float
    critical: float


@dataclass
class RegimeGrid:
    T_values: np.ndarray
    E_values: np.ndarray
    flash: np.ndarray  # shape (len(T_values), len(E_values))
    boundary: np.ndarray  # critical field per temperature, V/m


def _side_cooling(p: DimensionalParameters, T: float) -> float:
    R = p.radius_R
    return (R * p.h_side + 4.0 * R * p.emissivity * p.stefan_boltzmann * T**3) / p.k_thermal


def _heating_prefactor(p: DimensionalParameters, T: float) -> float:
    """Heating group per unit (V/L)^2."""
    Rg = p.gas_constant
    return (
        p.radius_R**2 * p.arrhenius_A * p.activation_E / (p.k_thermal * Rg * T**2)
        * math.exp(-p.activation_E / (Rg * T))
    )


def flash_condition(p: DimensionalParameters, T_furnace: float, field: float) -> FlashCheck:
    if not T_furnace > 0 or field < 0:
        raise ValueError("need T_furnace > 0 and field >= 0")
    heating = _heating_prefactor(p, T_furnace) * field**2
    critical = radial_critical_lambda(_side_cooling(p, T_furnace))
    return FlashCheck(flash=heating > critical, heating=heating, critical=critical)


def critical_field(p: DimensionalParameters, T_furnace: float) -> float:
    """Field strength V/L (V/m) above which flash is predicted."""
    if not T_furnace > 0:
        raise ValueError("T_furnace must be positive")
    Rg = p.gas_constant
    lam_c = radial_critical_lambda(_side_cooling(p, T_furnace))
    return math.sqrt(
        lam_c * p.k_thermal * Rg * T_furnace**2 / (p.radius_R**2 * p.arrhenius_A * p.activation_E)
    ) * math.exp(p.activation_E / (2.0 * Rg * T_furnace))


def _bisect_boundary(p, T, lo, hi, rtol):
    while flash_condition(p, T, hi).flash is False:
        lo, hi = hi, 2.0 * hi
    while lo > 0 and flash_condition(p, T, lo).flash:
        hi, lo = lo, 0.5 * lo
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if flash_condition(p, T, mid).flash:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def regime_diagram(
    p: DimensionalParameters,
    T_range: Sequence[float],
    E_range: Sequence[float],
    resolution: int | tuple[int, int],
    spacing: str = "linear",
    rtol: float = 1e-8,
) -> RegimeGrid:
    """Classify a (temperature, field) grid and locate the boundary.

    The boundary at each temperature is found by bisection on the field
    (to ``rtol``), independently of the closed form in :func:`critical_field`.
    ``spacing`` applies to the field axis ("linear" or "log").
    """
    nT, nE = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nT < 2 or nE < 2:
        raise ValueError("resolution must be at least 2")
    T_lo, T_hi = T_range
    E_lo, E_hi = E_range
    if not (0 < T_lo < T_hi and 0 < E_lo < E_hi):
        raise ValueError("ranges must be positive and increasing")
    T_values = np.linspace(T_lo, T_hi, nT)
    if spacing == "log":
        E_values = np.geomspace(E_lo, E_hi, nE)
    elif spacing == "linear":
        E_values = np.linspace(E_lo, E_hi, nE)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    flash = np.zeros((nT, nE), dtype=bool)
    boundary = np.empty(nT)
    for i, T in enumerate(T_values):
        for j, E in enumerate(E_values):
            flash[i, j] = flash_condition(p, float(T), float(E)).flash
        boundary[i] = _bisect_boundary(p, float(T), float(E_lo), float(E_hi), rtol)
    return RegimeGrid(T_values=T_values, E_values=E_values, flash=flash, boundary=boundary)
