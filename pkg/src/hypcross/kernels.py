"""Trapezoid multipliers, de la Vallée Poussin block kernels and dyadic blocks.

Conventions
-----------
The Fourier transform is ``F f(lam) = int f(x) exp(-2 pi i lam x) dx`` so that
frequencies ``lam`` are measured in cycles per unit length.

``k_m`` is the trapezoid multiplier (1 on ``|lam| < 2**(m-1)``, linear ramp to
0 at ``2**m``) for ``m >= 1``, the unit triangle for ``m = 0`` and identically
0 for ``m = -1``. ``K_m`` is its inverse transform and the block kernel is the
tensor product ``A*_s(x) = prod_j (K_{s_j} - K_{s_j - 1})(x_j)``.

Each one-dimensional factor has the form ``a * P(b * x)`` where ``P(t) =
h(t) / t**2`` with ``h`` a trigonometric polynomial of period ``pi``:

============  ==============  ==================  ===================================
``s_j``       ``a``           ``b``               ``P(t)``
============  ==============  ==================  ===================================
0             1               pi                  sin(t)^2 / t^2
1             2               pi                  sin(t)^2 cos(2t) / t^2
>= 2          2**(s_j-2)      pi * 2**(s_j-2)     G(t) (see :func:`profile_G`)
============  ==============  ==================  ===================================

Only factors with ``s_j >= 2`` are dilations of one common profile ``G``; the
``s_j = 1`` factor is a different profile because ``k_0`` is a triangle rather
than a trapezoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from hypcross.errors import ValidationError


def as_multi_index(s: Sequence[int]) -> tuple:
    """Validate a dyadic block label and return it as a tuple of ints."""
    if np.isscalar(s):
        s = (s,)
    values = []
    for j, v in enumerate(s):
        if isinstance(v, bool) or not float(v).is_integer() or v < 0:
            raise ValidationError(f"multi-index entry s[{j}] = {v!r} must be a non-negative integer")
        values.append(int(v))
    if not values:
        raise ValidationError("multi-index must have at least one coordinate")
    return tuple(values)


def l1(s: Sequence[int]) -> int:
    """``||s||_1``."""
    return int(sum(s))


def _points(lam, d: int) -> np.ndarray:
    arr = np.asarray(lam, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.shape[-1] != d:
        raise ValidationError(f"expected points of dimension {d}, got trailing axis {arr.shape[-1]}")
    return arr


# ---------------------------------------------------------------------------
# frequency side


def multiplier_k(m: int, lam):
    """Trapezoid multiplier ``k_m(lam)``; vectorised over ``lam``."""
    if m < -1:
        raise ValidationError(f"multiplier index m = {m} must be >= -1")
    a = np.abs(np.asarray(lam, dtype=float))
    if m == -1:
        out = np.zeros_like(a)
    elif m == 0:
        out = np.clip(1.0 - a, 0.0, 1.0)
    else:
        out = np.clip(2.0 * (1.0 - a / 2.0**m), 0.0, 1.0)
    return out if out.ndim else float(out)


def factor_multiplier(m: int, lam):
    """One-dimensional block multiplier ``k_m - k_{m-1}``."""
    return multiplier_k(m, lam) - multiplier_k(m - 1, lam)


def block_multiplier(s: Sequence[int], lam):
    """Tensor multiplier ``prod_j (k_{s_j} - k_{s_j-1})(lam_j)``.

    ``lam`` has shape ``(..., d)``; the result has shape ``(...)``.
    """
    s = as_multi_index(s)
    pts = _points(lam, len(s))
    out = np.ones(pts.shape[:-1])
    for j, sj in enumerate(s):
        out = out * factor_multiplier(sj, pts[..., j])
    return out if out.ndim else float(out)


def factor_knots(m: int) -> tuple:
    """Breakpoints (``>= 0``) of the piecewise-linear factor multiplier."""
    if m == 0:
        return (0.0, 1.0)
    if m == 1:
        return (0.0, 1.0, 2.0)
    return (0.0, 2.0 ** (m - 2), 2.0 ** (m - 1), 2.0**m)


def block_contains(s: Sequence[int], lam) -> bool:
    """Membership of ``lam`` in the half-open dyadic block ``Q*_{2^s}``.

    Coordinate ``j`` must satisfy ``eta(s_j) 2**(s_j-1) <= |lam_j| < 2**s_j``
    with ``eta(0) = 0``.
    """
    s = as_multi_index(s)
    pts = _points(lam, len(s))
    ok = np.ones(pts.shape[:-1], dtype=bool)
    for j, sj in enumerate(s):
        a = np.abs(pts[..., j])
        lo = 0.0 if sj == 0 else 2.0 ** (sj - 1)
        ok &= (a >= lo) & (a < 2.0**sj)
    return bool(ok) if ok.ndim == 0 else ok


def dyadic_index(lam) -> np.ndarray:
    """Per-coordinate dyadic scale of ``lam``: the unique ``s_j`` with
    ``lam_j`` in the ``s_j``-th annulus. Exact (uses the binary exponent)."""
    a = np.abs(np.asarray(lam, dtype=float))
    _, e = np.frexp(a)
    return np.maximum(e, 0).astype(np.int64)


# ---------------------------------------------------------------------------
# space side


def profile_G(t):
    """``G(t) = sin(t)^2 (2cos 2t + 1)(cos 2t + cos 4t - 1) / t^2``.

    Evaluated through ``sinc`` so there is no cancellation near 0; ``G(0) = 3``.
    """
    t = np.asarray(t, dtype=float)
    c2 = np.cos(2.0 * t)
    out = np.sinc(t / np.pi) ** 2 * (2.0 * c2 + 1.0) * (c2 + np.cos(4.0 * t) - 1.0)
    return out if out.ndim else float(out)


def _profile_zero(t):
    return np.sinc(np.asarray(t, dtype=float) / np.pi) ** 2


def _profile_one(t):
    t = np.asarray(t, dtype=float)
    return np.sinc(t / np.pi) ** 2 * np.cos(2.0 * t)


@dataclass(frozen=True)
class FactorProfile:
    """Space-side factor ``x -> amplitude * shape(dilation * x)``.

    ``shape(t) = numerator(t) / t**2`` with ``numerator`` of period ``pi``
    whose zeros in ``[0, pi)`` are listed in ``zeros``. ``peak`` is
    ``sup |shape| = shape(0)`` and ``tail_const`` bounds ``|numerator|``, so
    that ``|shape(t)| <= min(peak, tail_const / t**2)``.
    """

    name: str
    amplitude: float
    dilation: float
    shape: Callable
    peak: float
    tail_const: float
    zeros: tuple

    def __call__(self, x):
        return self.amplitude * self.shape(self.dilation * np.asarray(x, dtype=float))

    @property
    def sup(self) -> float:
        return self.amplitude * self.peak

    def envelope(self, x):
        """Pointwise bound ``|factor(x)| <= envelope(x)``, even and non-increasing in ``|x|``."""
        t = self.dilation * np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            tail = np.where(t > 0, self.tail_const / np.maximum(t, 1e-300) ** 2, np.inf)
        return self.amplitude * np.minimum(self.peak, tail)


_C_STAR = (math.sqrt(17.0) - 1.0) / 4.0
_G_ZEROS = tuple(
    sorted(
        {
            0.0,
            math.pi / 3.0,
            2.0 * math.pi / 3.0,
            0.5 * math.acos(_C_STAR),
            math.pi - 0.5 * math.acos(_C_STAR),
        }
    )
)

_SHAPE_ZERO = dict(name="K0", shape=_profile_zero, peak=1.0, tail_const=1.0, zeros=(0.0,))
_SHAPE_ONE = dict(
    name="K1-K0", shape=_profile_one, peak=1.0, tail_const=1.0, zeros=(0.0, math.pi / 4.0, 3.0 * math.pi / 4.0)
)
_SHAPE_G = dict(name="G", shape=profile_G, peak=3.0, tail_const=9.0, zeros=_G_ZEROS)


def factor_profile(m: int) -> FactorProfile:
    """Space-side description of the one-dimensional factor ``K_m - K_{m-1}``."""
    if m < 0:
        raise ValidationError(f"scale {m} must be >= 0")
    if m == 0:
        return FactorProfile(amplitude=1.0, dilation=math.pi, **_SHAPE_ZERO)
    if m == 1:
        return FactorProfile(amplitude=2.0, dilation=math.pi, **_SHAPE_ONE)
    scale = 2.0 ** (m - 2)
    return FactorProfile(amplitude=scale, dilation=math.pi * scale, **_SHAPE_G)


def kernel_K(m: int, x):
    """Inverse transform ``K_m`` of the trapezoid multiplier (``K_{-1} = 0``)."""
    x = np.asarray(x, dtype=float)
    if m == -1:
        out = np.zeros_like(x)
    elif m == 0:
        out = np.sinc(x) ** 2
    else:
        a = 2.0 ** (m - 1)
        out = 4.0 * a * np.sinc(2.0 * a * x) ** 2 - a * np.sinc(a * x) ** 2
    return out if out.ndim else float(out)


def eval_factor(m: int, x):
    """One-dimensional kernel factor ``(K_m - K_{m-1})(x)``."""
    out = factor_profile(m)(x)
    return out if np.ndim(out) else float(out)


def eval_A_star(s: Sequence[int], x):
    """Block kernel ``A*_s`` at points ``x`` of shape ``(..., d)``."""
    s = as_multi_index(s)
    pts = _points(x, len(s))
    out = np.ones(pts.shape[:-1])
    for j, sj in enumerate(s):
        out = out * factor_profile(sj)(pts[..., j])
    return out if out.ndim else float(out)


def block_sup(s: Sequence[int]) -> float:
    """Exact ``sup |A*_s|``, attained at the origin."""
    return float(np.prod([factor_profile(sj).sup for sj in as_multi_index(s)]))
