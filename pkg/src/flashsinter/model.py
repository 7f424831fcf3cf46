"""Physical parameters, scales and dimensionless groups.

All quantities are SI.  The reference temperature is always the furnace
temperature, and the temperature excess is measured in units of
``deltaT = R_g T0^2 / E`` so that the Arrhenius conductivity becomes
``exp(theta / (1 + nu theta))``.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

__all__ = [
    "ControlMode",
    "ControlSchedule",
    "DimensionalParameters",
    "DimensionlessGroups",
    "DomainError",
    "HighAspectGroups",
    "arrhenius_conductivity",
    "conductivity_hat",
    "high_aspect_groups",
    "nondimensionalize",
]


class DomainError(ValueError):
    """Argument outside the domain where a formula is defined."""


@dataclass(frozen=True)
class DimensionalParameters:
    """Material constants and operating conditions of a cylindrical sample.

    Parameters
    ----------
    rho : float
        Density, kg m^-3.
    c_heat : float
        Specific heat, J kg^-1 K^-1.
    k_thermal : float
        Thermal conductivity, J m^-1 s^-1 K^-1.
    emissivity : float
        Surface emissivity, in [0, 1].
    stefan_boltzmann : float
        W m^-2 K^-4.
    h_side, h_electrode : float
        Heat-transfer coefficients at the free sides and at the electrodes,
        J m^-2 s^-1 K^-1.
    arrhenius_A : float
        Conductivity prefactor, S m^-1.
    activation_E : float
        Activation energy, J mol^-1.
    gas_constant : float
        J K^-1 mol^-1.
    length_L, radius_R : float
        Sample length and radius, m.
    T_furnace : float
        Furnace temperature, K.
    V0 : float
        Applied voltage, V.
    I0 : float
        Current limit, A.
    """

    rho: float = 6050.0
    c_heat: float = 600.0
    k_thermal: float = 2.7
    emissivity: float = 0.7
    stefan_boltzmann: float = 5.67e-8
    h_side: float = 10.0
    h_electrode: float = 10.0
    arrhenius_A: float = 9.3e5
    activation_E: float = 171e3
    gas_constant: float = 8.31
    length_L: float = 10e-3
    radius_R: float = 1.5e-3
    T_furnace: float = 1110.0
    V0: float = 300.0
    I0: float = 0.5

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError(f"{f.name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{f.name} must be finite, got {value!r}")
            if f.name == "emissivity":
                if not 0.0 <= value <= 1.0:
                    raise ValueError(f"emissivity ∈ [0,1] violated: emissivity = {value!r}")
            elif value <= 0.0:
                raise ValueError(f"{f.name} > 0 violated: {f.name} = {value!r}")
        if self.length_L <= self.radius_R:
            warnings.warn(
                f"sample is not slender (L = {self.length_L} m <= R = {self.radius_R} m)",
                stacklevel=3,
            )

    @classmethod
    def table1(cls) -> "DimensionalParameters":
        """3YSZ sample of the reference experiments (the field defaults)."""
        return cls()

    def to_dict(self) -> dict[str, float]:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "DimensionalParameters":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise KeyError(f"unknown dimensional parameter(s): {', '.join(unknown)}")
        missing = sorted(known - set(data))
        if missing:
            raise KeyError(f"missing dimensional parameter(s): {', '.join(missing)}")
        return cls(**data)

    def with_(self, **changes) -> "DimensionalParameters":
        return replace(self, **changes)


@dataclass(frozen=True)
class DimensionlessGroups:
    """Dimensionless groups plus the scales used to form them.

    ``lambda_`` is the ohmic heating strength (``lambda`` is reserved in
    Python).  The cooling and heating groups may be zero to express the
    insulated or unheated limits; ``alpha`` and ``curlyI`` may be infinite.
    """

    delta: float
    lambda_: float
    beta: float
    alpha: float
    curlyI: float
    nu: float
    sigma0: float = 1.0
    t0: float = 1.0
    deltaT: float = 1.0
    T0: float = 1.0

    def __post_init__(self) -> None:
        for name in ("delta", "sigma0", "t0", "deltaT", "T0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} > 0 violated: {name} = {value!r}")
        for name in ("lambda_", "beta", "nu"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} >= 0 violated: {name} = {value!r}")
        if not self.alpha >= 0.0:
            raise ValueError(f"alpha >= 0 violated: alpha = {self.alpha!r}")
        if not self.curlyI > 0.0:
            raise ValueError(f"curlyI > 0 violated: curlyI = {self.curlyI!r}")

    def with_(self, **changes) -> "DimensionlessGroups":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, float]:
        return {("lambda" if k == "lambda_" else k): v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class HighAspectGroups:
    """Rescaled groups for slender samples: ``Lambda = lambda/delta^2``,
    ``B = 2 beta/delta^2`` and time ``t~ = delta^2 t``."""

    Lambda: float
    B: float
    alpha: float
    curlyI: float = math.inf
    time_rescale: float = 1.0

    def __post_init__(self) -> None:
        if not (self.Lambda >= 0.0 and self.B >= 0.0 and self.alpha >= 0.0):
            raise ValueError("Lambda, B and alpha must be non-negative")
        if not self.curlyI > 0.0:
            raise ValueError(f"curlyI > 0 violated: curlyI = {self.curlyI!r}")
        if not self.time_rescale > 0.0:
            raise ValueError("time_rescale must be positive")


class ControlMode(str, enum.Enum):
    VOLTAGE_THEN_CURRENT = "voltage_then_current"
    VOLTAGE_ONLY = "voltage_only"
    CURRENT_ONLY = "current_only"


@dataclass(frozen=True)
class ControlSchedule:
    """Electrical protocol: fixed voltage until the current reaches its
    limit, then fixed current for the rest of the run."""

    mode: ControlMode = ControlMode.VOLTAGE_THEN_CURRENT
    voltage_setpoint: float = 1.0
    current_limit: float = math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ControlMode(self.mode))
        if not self.voltage_setpoint > 0.0 or not math.isfinite(self.voltage_setpoint):
            raise ValueError(f"voltage_setpoint > 0 violated: {self.voltage_setpoint!r}")
        if not self.current_limit > 0.0:
            raise ValueError(f"current_limit > 0 violated: {self.current_limit!r}")
        if self.mode is ControlMode.CURRENT_ONLY and not math.isfinite(self.current_limit):
            raise ValueError("current_only control needs a finite current_limit")

    @classmethod
    def from_groups(cls, groups: DimensionlessGroups, mode=ControlMode.VOLTAGE_THEN_CURRENT):
        limit = math.inf if ControlMode(mode) is ControlMode.VOLTAGE_ONLY else groups.curlyI
        return cls(mode=mode, current_limit=limit)


def arrhenius_conductivity(T: float, p: DimensionalParameters) -> float:
    """Electrical conductivity ``A exp(-E / (R_g T))`` in S/m."""
    if not T > 0.0:
        raise DomainError(f"temperature must be positive, got {T!r}")
    return p.arrhenius_A * math.exp(-p.activation_E / (p.gas_constant * T))


def nondimensionalize(p: DimensionalParameters) -> DimensionlessGroups:
    T0 = p.T_furnace
    sigma0 = arrhenius_conductivity(T0, p)
    R, L, k = p.radius_R, p.length_L, p.k_thermal
    deltaT = p.gas_constant * T0**2 / p.activation_E
    return DimensionlessGroups(
        delta=R / L,
        lambda_=sigma0 * p.V0**2 * R**2 / (k * deltaT * L**2),
        beta=(p.h_side * R + 4.0 * p.emissivity * p.stefan_boltzmann * T0**3 * R) / k,
        alpha=p.h_electrode * L / k,
        curlyI=p.I0 * L / (sigma0 * p.V0 * math.pi * R**2),
        nu=p.gas_constant * T0 / p.activation_E,
        sigma0=sigma0,
        t0=p.rho * p.c_heat * R**2 / k,
        deltaT=deltaT,
        T0=T0,
    )


def conductivity_hat(theta, nu: float):
    """Dimensionless conductivity ``exp(theta / (1 + nu theta))``.

    Accepts scalars or numpy arrays.  ``nu = 0`` gives the
    Frank-Kamenetskii form ``exp(theta)``.
    """
    theta_arr = np.asarray(theta, dtype=float)
    denom = 1.0 + nu * theta_arr
    if np.any(denom <= 0.0):
        raise DomainError("1 + nu*theta must be positive")
    out = np.exp(theta_arr / denom)
    return float(out) if out.ndim == 0 else out


def high_aspect_groups(groups: DimensionlessGroups) -> HighAspectGroups:
    d2 = groups.delta**2
    return HighAspectGroups(
        Lambda=groups.lambda_ / d2,
        B=2.0 * groups.beta / d2,
        alpha=groups.alpha,
        curlyI=groups.curlyI,
        time_rescale=d2,
    )
