"""Closed-form baselines for the numerical pipeline.

The analytical neutral angle of flat rolling and the central deflection of
a clamped circular plate under uniform pressure.
"""

import math
from dataclasses import dataclass

from .errors import NoAnalyticalNeutral, ValidationError

__all__ = ["PlateSpec", "analytical_neutral_angle", "flexural_rigidity", "plate_max_deflection"]


@dataclass(frozen=True)
class PlateSpec:
    """Circular plate standing in for the roll section.

    ``rigidity_form="as-printed"`` uses ``E t^3 / (12 (1 - nu))``;
    ``"standard"`` uses the textbook ``E t^3 / (12 (1 - nu^2))``.
    """

    radius: float
    elastic_modulus: float = 211e9
    thickness: float = 1.0
    poisson: float = 0.3
    rigidity_form: str = "as-printed"

    def __post_init__(self):
        for name in ("radius", "thickness", "elastic_modulus"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be > 0, got {value!r}")
        if not 0 < self.poisson < 0.5:
            raise ValidationError(f"poisson must lie in (0, 0.5), got {self.poisson!r}")
        if self.rigidity_form not in ("as-printed", "standard"):
            raise ValidationError(
                f"rigidity_form must be 'as-printed' or 'standard', got {self.rigidity_form!r}"
            )


def analytical_neutral_angle(alpha, mu):
    """Neutral angle [rad] from ``sin g = sin(a)/2 + (cos(a) - 1)/(2 mu)``.

    Raises
    ------
    NoAnalyticalNeutral
        If the right-hand side falls outside ``(0, sin alpha)``, i.e. the
        friction is too low to draw the strip in.
    """
    if not 0 < alpha < math.pi / 2:
        raise ValidationError(f"alpha must lie in (0, pi/2), got {alpha!r}")
    if not mu > 0:
        raise ValidationError(f"mu must be > 0, got {mu!r}")
    s = 0.5 * math.sin(alpha) + (math.cos(alpha) - 1.0) / (2.0 * mu)
    if not 0 < s < math.sin(alpha):
        raise NoAnalyticalNeutral(
            f"sin(neutral angle) = {s:.6g} outside (0, sin alpha); friction {mu} "
            f"too low for contact angle {math.degrees(alpha):.4g} deg"
        )
    return math.asin(s)


def flexural_rigidity(spec):
    """Plate rigidity ``D`` [N m]."""
    factor = 1.0 - spec.poisson
    if spec.rigidity_form == "standard":
        factor = 1.0 - spec.poisson ** 2
    return spec.elastic_modulus * spec.thickness ** 3 / (12.0 * factor)


def plate_max_deflection(pressure, spec):
    """Central deflection ``p a^2 / (16 pi D)`` [m] for pressure ``p`` [Pa]."""
    if pressure < 0:
        raise ValidationError(f"pressure must be >= 0, got {pressure!r}")
    return pressure * spec.radius ** 2 / (16.0 * math.pi * flexural_rigidity(spec))
