"""Smoothness vectors and the direction vectors derived from them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hypcross.errors import DomainError, ValidationError


@dataclass(frozen=True)
class SmoothnessProfile:
    """Smoothness vector ``r`` together with its derived quantities.

    Attributes
    ----------
    r : tuple of float
        Smoothness per coordinate, all strictly positive.
    r_min : float
        Smallest entry of ``r``.
    nu : int
        Number of coordinates equal to ``r_min`` (exact comparison).
    gamma : tuple of float
        ``r / r_min``; equal to 1 exactly on the minimal coordinates.
    """

    r: tuple
    r_min: float
    nu: int
    gamma: tuple

    @property
    def d(self) -> int:
        return len(self.r)

    @property
    def is_isotropic(self) -> bool:
        """True when every coordinate attains ``r_min`` (``nu == d``)."""
        return self.nu == self.d


def analyze_smoothness(r: Sequence[float]) -> SmoothnessProfile:
    """Validate ``r`` and derive ``r_min``, ``nu`` and ``gamma``.

    The input need not be sorted. ``nu`` counts exact floating-point ties
    with the minimum; callers who want near-ties merged must round first.
    """
    values = tuple(float(v) for v in r)
    if len(values) == 0:
        raise ValidationError("smoothness vector must have at least one coordinate")
    for j, v in enumerate(values):
        if not np.isfinite(v) or v <= 0:
            raise ValidationError(f"smoothness coordinate r[{j}] = {v} must be > 0")
    r_min = min(values)
    nu = sum(1 for v in values if v == r_min)
    gamma = tuple(1.0 if v == r_min else v / r_min for v in values)
    return SmoothnessProfile(r=values, r_min=r_min, nu=nu, gamma=gamma)


def gamma_bar(profile: SmoothnessProfile, shift: float) -> tuple:
    """Shifted direction vector ``(r_j - shift) / (r_min - shift)``.

    ``shift = 1`` gives the vector used for the uniform-norm estimate,
    ``shift = 1 - 1/q`` the one used for the ``L_q`` estimate.
    """
    shift = float(shift)
    if shift >= profile.r_min:
        raise DomainError(
            f"shift {shift} must be < r_min = {profile.r_min}; "
            "the rate exponent r_min - shift would not be positive"
        )
    den = profile.r_min - shift
    return tuple(1.0 if v == profile.r_min else (v - shift) / den for v in profile.r)
