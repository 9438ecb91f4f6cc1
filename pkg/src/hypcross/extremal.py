"""Extremal block sums for the lower-bound experiments.

All constructions use the isotropic direction ``gamma = (1, ..., 1)`` and live
on the first layer outside the cross, ``||s||_1 = n + 1``, so their symbolic
cross projection is empty. The free constant in front of each construction is
solved for so that the surrogate decomposition norm (``p = 1``) equals one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from hypcross.blocksum import BlockSum, surrogate_besov_norm
from hypcross.cross import enumerate_layer
from hypcross.errors import ValidationError
from hypcross.kernels import as_multi_index, l1
from hypcross.smoothness import SmoothnessProfile

KINDS = ("layer_theta", "layer_sup", "single")


@dataclass(frozen=True)
class ExtremalSpec:
    """Parameters of one extremal function.

    Parameters
    ----------
    profile : SmoothnessProfile
        Must be isotropic (``nu = d``).
    theta : float
        Summation index in ``[1, inf]``.
    n : int
        Cross level, ``>= 1``.
    kind : str
        ``"layer_theta"`` (layer with ``n**(-(d-1)/theta)`` weight),
        ``"layer_sup"`` (layer, no log weight) or ``"single"`` (one block).
    s_tilde : tuple, optional
        Block used by ``kind="single"``; defaults to ``(n+1, 0, ..., 0)``.
    """

    profile: SmoothnessProfile
    theta: float
    n: int
    kind: str
    s_tilde: Optional[tuple] = None

    def __post_init__(self):
        if not self.profile.is_isotropic:
            raise ValidationError("extremal functions require an isotropic profile (nu = d)")
        theta = float(self.theta)
        if not theta >= 1:
            raise ValidationError(f"theta = {self.theta} must be in [1, inf]")
        object.__setattr__(self, "theta", theta)
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValidationError(f"n = {self.n!r} must be an integer >= 1")
        object.__setattr__(self, "n", int(self.n))
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == "layer_theta" and math.isinf(theta):
            raise ValidationError("kind='layer_theta' needs finite theta; use kind='layer_sup' for theta = inf")
        if self.s_tilde is not None:
            s = as_multi_index(self.s_tilde)
            if len(s) != self.profile.d or l1(s) != self.n + 1:
                raise ValidationError(f"s_tilde {s} must have dimension {self.profile.d} and ||s||_1 = {self.n + 1}")
            object.__setattr__(self, "s_tilde", s)

    @property
    def d(self) -> int:
        return self.profile.d

    def block(self) -> tuple:
        """The block of a ``single`` construction."""
        if self.s_tilde is not None:
            return self.s_tilde
        return (self.n + 1,) + (0,) * (self.d - 1)


def raw_coefficient(spec: ExtremalSpec) -> float:
    """Coefficient before normalization (the same on every block used)."""
    base = 2.0 ** (-spec.n * spec.profile.r_min)
    if spec.kind == "layer_theta":
        return base * spec.n ** (-(spec.d - 1) / spec.theta)
    return base


def support(spec: ExtremalSpec) -> list:
    if spec.kind == "single":
        return [spec.block()]
    return enumerate_layer(spec.d, spec.n + 1)


def raw_extremal(spec: ExtremalSpec) -> BlockSum:
    c = raw_coefficient(spec)
    return BlockSum.from_terms(spec.d, [(s, c) for s in support(spec)])


def normalization_constant(spec: ExtremalSpec) -> float:
    """``C`` with ``surrogate_besov_norm(C * raw, profile, theta, 1) = 1``."""
    return 1.0 / surrogate_besov_norm(raw_extremal(spec), spec.profile, spec.theta, 1.0)


def make_extremal(spec: ExtremalSpec, normalize: bool = True) -> BlockSum:
    """Build the extremal block sum; ``normalize=False`` returns the raw form."""
    f = raw_extremal(spec)
    if not normalize:
        return f
    return f.scale(normalization_constant(spec))
