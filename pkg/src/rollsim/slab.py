"""Slab-method roll-gap solver.

The small-angle equilibrium of a strip slice (plane strain, yield
criterion ``q - p = 2k``) reads

    h * d(q - 2k)/dphi = 4 k R' phi +/- 2 mu R' q,    h = h2 + R' phi**2

with ``+`` on the exit side and ``-`` on the entry side. Both branches are
marched with an explicit forward difference from their free boundary
(``p = 0``, so ``q = 2k``): the exit branch from ``phi = 0`` upwards, the
entry branch from ``phi = alpha`` downwards. Their intersection is the
neutral point; the mean roll pressure is the arc average of the composite
friction hill.

Angles are radians internally, thicknesses and radii mm, pressures MPa.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, NoNeutralPoint, SolverError, ValidationError
from .material import flow_stress_at_thickness

__all__ = [
    "RollPassGeometry",
    "BranchProfile",
    "PressureProfile",
    "MultipleNeutralWarning",
    "contact_angle",
    "thickness_at",
    "angle_grid",
    "march_exit",
    "march_entry",
    "find_neutral",
    "solve_pass",
    "composite",
    "mean_pressure",
    "contact_length",
]

DEFAULT_STRAIN_RATE = 0.052  # 1/s, fastest tensile test


class MultipleNeutralWarning(UserWarning):
    """The entry and exit branches cross more than once."""


@dataclass(frozen=True)
class RollPassGeometry:
    """One rolling pass.

    Attributes
    ----------
    entry_thickness, exit_thickness : float
        Strip thickness before and after the pass [mm].
    roll_radius : float
        (Flattened) roll radius R' [mm].
    friction : float
        Coulomb friction coefficient between roll and strip.
    step_deg : float
        Angular marching step [deg].
    reference_thickness : float, optional
        Thickness at which the strain is zero [mm]; defaults to the entry
        thickness. Set it to the annealed thickness for cumulative strain.
    strain_rate : float
        Strain rate fed to the flow-stress model [1/s].
    """

    entry_thickness: float
    exit_thickness: float
    roll_radius: float = 75.0
    friction: float = 0.1
    step_deg: float = 0.01
    reference_thickness: Optional[float] = None
    strain_rate: float = DEFAULT_STRAIN_RATE

    def __post_init__(self):
        h1, h2 = self.entry_thickness, self.exit_thickness
        if not h2 > 0:
            raise ValidationError(f"exit_thickness must be > 0, got {h2}")
        if not h1 > h2:
            raise DomainError(f"no draft: entry_thickness {h1} must exceed exit_thickness {h2}")
        if not self.roll_radius > 0:
            raise ValidationError(f"roll_radius must be > 0, got {self.roll_radius}")
        if not 0 <= self.friction < 1:
            raise ValidationError(f"friction must lie in [0, 1), got {self.friction}")
        if not self.step_deg > 0:
            raise ValidationError(f"step_deg must be > 0, got {self.step_deg}")
        if not self.strain_rate > 0:
            raise ValidationError(f"strain_rate must be > 0, got {self.strain_rate}")
        if self.reference_thickness is None:
            object.__setattr__(self, "reference_thickness", float(h1))
        elif self.reference_thickness < h1 * (1 - 1e-12):
            raise DomainError("reference_thickness must be >= entry_thickness")

    @property
    def step(self):
        """Angular step [rad]."""
        return math.radians(self.step_deg)


@dataclass(frozen=True, eq=False)
class BranchProfile:
    """Pressure along one side of the roll gap, in marching order."""

    angles: np.ndarray
    pressures: np.ndarray
    side: str
    extrapolated: bool = False

    def __post_init__(self):
        if self.side not in ("entry", "exit"):
            raise ValidationError(f"side must be 'entry' or 'exit', got {self.side!r}")
        a = np.array(self.angles, float)
        q = np.array(self.pressures, float)
        if a.shape != q.shape or a.ndim != 1 or a.size < 2:
            raise ValidationError("angles and pressures must be equal-length 1D arrays (>= 2)")
        a.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "pressures", q)

    def ascending(self):
        """``(angles, pressures)`` sorted by increasing angle."""
        if self.angles[0] > self.angles[-1]:
            return self.angles[::-1], self.pressures[::-1]
        return self.angles, self.pressures


@dataclass(frozen=True, eq=False)
class PressureProfile:
    entry: BranchProfile
    exit: BranchProfile
    neutral_angle: float
    neutral_pressure: float
    alpha: float

    @property
    def extrapolated(self):
        return self.entry.extrapolated or self.exit.extrapolated


def contact_angle(geom):
    """Contact angle ``sqrt((h1 - h2) / R')`` [rad]."""
    draft = geom.entry_thickness - geom.exit_thickness
    if not draft > 0:
        raise DomainError("no draft: entry thickness must exceed exit thickness")
    return math.sqrt(draft / geom.roll_radius)


def contact_length(geom):
    """Projected arc-of-contact length ``sqrt(R' (h1 - h2))`` [mm]."""
    return math.sqrt(geom.roll_radius * (geom.entry_thickness - geom.exit_thickness))


def thickness_at(geom, phi):
    """Strip thickness ``h2 + R' phi**2`` [mm] at angle ``phi`` [rad]."""
    alpha = contact_angle(geom)
    p = np.asarray(phi, float)
    if np.any(p < 0) or np.any(p > alpha * (1 + 1e-9)):
        raise DomainError(f"phi must lie in [0, alpha={alpha!r}]")
    h = geom.exit_thickness + geom.roll_radius * p * p
    # keep h <= h1 so the entry-plane strain is exactly zero
    h = np.minimum(h, geom.entry_thickness)
    return float(h) if h.ndim == 0 else h


def angle_grid(geom):
    """Uniform grid on ``[0, alpha]`` with spacing at most ``geom.step``.

    Both branches share this grid so they can be compared point by point.
    """
    alpha = contact_angle(geom)
    n = max(int(math.ceil(alpha / geom.step - 1e-9)), 1)
    return np.linspace(0.0, alpha, n + 1)


def _two_k(geom, model, phi):
    h = thickness_at(geom, phi)
    two_k, flag = flow_stress_at_thickness(
        model, geom.reference_thickness, h, geom.strain_rate, return_flag=True
    )
    return h, np.broadcast_to(two_k, h.shape), flag


def _march(geom, model, phi, sign):
    """March ``q`` along ``phi`` (in the order given) with friction ``sign``."""
    h, two_k, flag = _two_k(geom, model, phi)
    R, mu = geom.roll_radius, geom.friction
    q = np.empty_like(phi)
    q[0] = two_k[0]
    p = 0.0  # horizontal stress q - 2k, zero at the free boundary
    with np.errstate(all="ignore"):
        for i in range(phi.size - 1):
            dphi = phi[i + 1] - phi[i]
            k_i = 0.5 * two_k[i]
            p += dphi * (4.0 * k_i * R * phi[i] + sign * 2.0 * mu * R * q[i]) / h[i]
            q[i + 1] = two_k[i + 1] + p
            if not math.isfinite(q[i + 1]):
                raise SolverError("pressure became non-finite", step=i + 1)
    return q, flag


def march_exit(geom, model):
    """Exit-side branch, marched from ``phi = 0`` towards ``alpha``."""
    phi = angle_grid(geom)
    q, flag = _march(geom, model, phi, +1.0)
    return BranchProfile(phi, q, "exit", flag)


def march_entry(geom, model):
    """Entry-side branch, marched from ``phi = alpha`` towards 0."""
    phi = angle_grid(geom)[::-1].copy()
    q, flag = _march(geom, model, phi, -1.0)
    return BranchProfile(phi, q, "entry", flag)


def find_neutral(entry, exit):
    """Intersection ``(angle, pressure)`` of the entry and exit branches.

    The branches must share an angle grid. The sign change of
    ``q_entry - q_exit`` nearest the exit plane is linearly interpolated.
    """
    a_en, q_en = entry.ascending()
    a_ex, q_ex = exit.ascending()
    if a_en.shape != a_ex.shape or not np.allclose(a_en, a_ex, rtol=0, atol=1e-12):
        raise ValidationError("entry and exit branches must share one angle grid")
    d = q_en - q_ex
    zero = d == 0
    change = np.signbit(d[:-1]) != np.signbit(d[1:])
    change &= ~zero[:-1] & ~zero[1:]
    events = np.flatnonzero(zero).tolist() + np.flatnonzero(change).tolist()
    if not events:
        raise NoNeutralPoint(
            "entry and exit branches do not intersect: "
            f"at phi=0 entry={q_en[0]:.6g}, exit={q_ex[0]:.6g}; "
            f"at phi=alpha entry={q_en[-1]:.6g}, exit={q_ex[-1]:.6g} MPa"
        )
    if len(events) > 1:
        warnings.warn(
            f"entry and exit branches cross {len(events)} times; using the first from the exit",
            MultipleNeutralWarning,
            stacklevel=2,
        )
    i = min(events)
    if zero[i]:
        return float(a_ex[i]), float(q_ex[i])
    t = d[i] / (d[i] - d[i + 1])
    angle = a_ex[i] + t * (a_ex[i + 1] - a_ex[i])
    pressure = q_ex[i] + t * (q_ex[i + 1] - q_ex[i])
    return float(angle), float(pressure)


def solve_pass(geom, model):
    """March both branches and locate the neutral point."""
    entry = march_entry(geom, model)
    exit_ = march_exit(geom, model)
    angle, pressure = find_neutral(entry, exit_)
    alpha = float(exit_.angles[-1])
    return PressureProfile(entry, exit_, angle, pressure, alpha)


def composite(profile):
    """Friction-hill curve ``(angles, pressures)`` on ``[0, alpha]``.

    Exit branch up to the neutral point, entry branch beyond it, with the
    neutral point inserted as a node.
    """
    a_ex, q_ex = profile.exit.ascending()
    a_en, q_en = profile.entry.ascending()
    phin = profile.neutral_angle
    lo = a_ex < phin
    hi = a_en > phin
    angles = np.concatenate([a_ex[lo], [phin], a_en[hi]])
    pressures = np.concatenate([q_ex[lo], [profile.neutral_pressure], q_en[hi]])
    return angles, pressures


def mean_pressure(profile):
    """Arc-averaged roll pressure [MPa] (trapezoidal rule over ``[0, alpha]``)."""
    angles, q = composite(profile)
    span = angles[-1] - angles[0]
    area = float(np.sum(0.5 * (q[1:] + q[:-1]) * np.diff(angles)))
    return area / span
