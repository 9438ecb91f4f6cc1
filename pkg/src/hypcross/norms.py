"""Lebesgue norms of block kernels and block sums.

Three routes are provided:

* closed-form block norms ``||A*_s||_p`` from cached one-dimensional
  reference integrals (exact up to the reference-integral error);
* an exact frequency-side ``L_2`` norm for arbitrary block sums
  (piecewise-quadratic products of the trapezoid multipliers);
* composite midpoint quadrature on a box with a certified envelope tail,
  used for general ``q`` and as an independent check of the first route.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from hypcross.errors import ToleranceError, ValidationError
from hypcross.kernels import (
    as_multi_index,
    block_sup,
    factor_knots,
    factor_multiplier,
    factor_profile,
)

log = logging.getLogger(__name__)

# periods of length pi integrated explicitly for reference integrals; the
# remainder bound decays like periods**(-2p) so p >= 1.5 needs far fewer
_REF_PERIODS = 2**16
_REF_PERIODS_FAST = 2**11
_REF_NODES = 32
_REF_CHUNK = 4096


# ---------------------------------------------------------------------------
# reference integrals


@dataclass(frozen=True)
class ReferenceIntegral:
    """``int_0^inf |P(t)|^p dt`` for one factor shape, with an error bound."""

    value: float
    error: float


def _period_rule(zeros: tuple, nodes: int):
    x, w = leggauss(nodes)
    pts = sorted(set(zeros) | {0.0, math.pi})
    t, wt = [], []
    for a, b in zip(pts[:-1], pts[1:]):
        t.append(0.5 * (b - a) * x + 0.5 * (a + b))
        wt.append(0.5 * (b - a) * w)
    return np.concatenate(t), np.concatenate(wt)


def _periods_integral(shape, zeros, p, nodes, periods):
    t0, w0 = _period_rule(zeros, nodes)
    partial = []
    for start in range(0, periods, _REF_CHUNK):
        k = np.arange(start, min(start + _REF_CHUNK, periods), dtype=float)
        t = k[:, None] * math.pi + t0[None, :]
        vals = np.abs(shape(t)) ** p
        partial.append(float(np.sum(vals @ w0)))
    return math.fsum(partial)


@functools.lru_cache(maxsize=None)
def reference_integral(m_branch: int, p: float) -> ReferenceIntegral:
    """``int_0^inf |P|^p`` for the factor shape of branch ``0``, ``1`` or ``2`` (``s_j >= 2``).

    The first ``2**16`` periods (``2**11`` when ``p >= 1.5``) are integrated by Gauss-Legendre between the
    zeros of the periodic numerator ``h``; beyond ``T`` the integrand is
    ``|h|^p t^(-2p)`` and its integral equals ``mu T^(1-2p)/(2p-1)`` (``mu``
    the period mean of ``|h|^p``) up to a remainder bounded by
    ``pi mu T^(-2p)`` (integration by parts against the periodic primitive).
    """
    if m_branch not in (0, 1, 2):
        raise ValidationError("branch must be 0, 1 or 2")
    p = float(p)
    if not p >= 1 or math.isinf(p):
        raise ValidationError(f"p = {p} must be finite and >= 1")
    prof = factor_profile(m_branch)
    shape, zeros = prof.shape, prof.zeros

    periods = _REF_PERIODS if p < 1.5 else _REF_PERIODS_FAST
    head = _periods_integral(shape, zeros, p, _REF_NODES, periods)
    head_coarse = _periods_integral(shape, zeros, p, _REF_NODES - 8, periods)

    t0, w0 = _period_rule(zeros, _REF_NODES)
    # numerator h(t) = shape(t) * t^2; evaluate away from t = 0
    tt = t0 + math.pi
    mu = float(np.sum(np.abs(shape(tt) * tt**2) ** p * w0)) / math.pi
    T = periods * math.pi
    tail = mu * T ** (1.0 - 2.0 * p) / (2.0 * p - 1.0)
    err = abs(head - head_coarse) + math.pi * mu * T ** (-2.0 * p) + 1e-15 * head
    return ReferenceIntegral(head + tail, err)


def _branch(m: int) -> int:
    return min(m, 2)


def factor_lp_norm(m: int, p: float) -> float:
    """``||K_m - K_{m-1}||_{L_p(R)}``; ``p = inf`` gives the supremum."""
    prof = factor_profile(m)
    if math.isinf(p):
        return prof.sup
    ref = reference_integral(_branch(m), p)
    return prof.amplitude * (2.0 * ref.value / prof.dilation) ** (1.0 / p)


def factor_lp_norm_relerr(m: int, p: float) -> float:
    """Relative error bound of :func:`factor_lp_norm` (finite ``p``)."""
    ref = reference_integral(_branch(m), p)
    return ref.error / ref.value / p


def block_lp_norm(s: Sequence[int], p: float) -> float:
    """``||A*_s||_p`` for finite ``p >= 1`` (product of one-dimensional norms).

    For ``s_j >= 2`` the factor norm equals ``c(p) 2**(s_j (1 - 1/p))`` with
    ``c(p)`` independent of ``s_j``; ``s_j = 0`` and ``s_j = 1`` use their own
    constants.
    """
    s = as_multi_index(s)
    p = float(p)
    if not p >= 1:
        raise ValidationError(f"p = {p} must be >= 1")
    if math.isinf(p):
        raise ValidationError("block_lp_norm takes finite p; use block_norm for p = inf")
    return float(np.prod([factor_lp_norm(sj, p) for sj in s]))


def block_norm(s: Sequence[int], p: float) -> float:
    """``||A*_s||_p`` for ``p`` in ``[1, inf]``."""
    if math.isinf(float(p)):
        return block_sup(s)
    return block_lp_norm(s, p)


def block_lp_norm_relerr(s: Sequence[int], p: float) -> float:
    """Relative error bound of :func:`block_lp_norm`."""
    return sum(factor_lp_norm_relerr(sj, p) for sj in as_multi_index(s))


def scale_constant(p: float) -> float:
    """``c(p)`` with ``||K_m - K_{m-1}||_p = c(p) 2**(m (1 - 1/p))`` for ``m >= 2``."""
    return factor_lp_norm(2, p) / 2.0 ** (2 * (1.0 - 1.0 / p))


# ---------------------------------------------------------------------------
# exact L2 through the frequency side


def _simpson_pieces(knots):
    a, b = np.asarray(knots[:-1]), np.asarray(knots[1:])
    return a, 0.5 * (a + b), b


@functools.lru_cache(maxsize=None)
def multiplier_inner(m1: int, m2: int) -> float:
    """``int_R (k_{m1}-k_{m1-1})(k_{m2}-k_{m2-1}) dlam``, exact up to rounding.

    Both factors are piecewise linear; on the merged knot intervals their
    product is quadratic, which Simpson's rule integrates exactly.
    """
    knots = sorted(set(factor_knots(m1)) | set(factor_knots(m2)))
    a, mid, b = _simpson_pieces(knots)

    def prod(x):
        return factor_multiplier(m1, x) * factor_multiplier(m2, x)

    pieces = (b - a) / 6.0 * (prod(a) + 4.0 * prod(mid) + prod(b))
    return 2.0 * math.fsum(pieces.tolist())


def l2_norm_exact(f) -> float:
    """``||f||_2`` of a block sum by Plancherel: ``sqrt(c^T M c)`` with
    ``M[s, s'] = prod_j multiplier_inner(s_j, s'_j)``."""
    if not f.terms:
        return 0.0
    idx = np.array(f.indices)
    c = f.coefficients
    gram = np.ones((len(c), len(c)))
    for j in range(f.d):
        col = idx[:, j]
        levels = sorted(set(col.tolist()))
        table = {(a, b): multiplier_inner(a, b) for a in levels for b in levels}
        gram *= np.array([[table[(a, b)] for b in col] for a in col])
    total = float(c @ gram @ c)
    return math.sqrt(max(total, 0.0))


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for box quadrature of ``int |f|^q``.

    Attributes
    ----------
    box_halfwidth : float
        Initial half-width ``L`` of the box ``[-L, L]^d``; doubled
        automatically until the envelope tail meets ``tail_tol``.
    points_per_wavelength : int
        Midpoint panels per shortest wavelength ``2**-s`` of the content.
    tail_tol : float
        Required bound on the tail contribution, relative to the norm value.
    max_halfwidth : float
        Cap for the automatic escalation of ``L``.
    max_points : int
        Cap on the number of quadrature nodes of one evaluation.
    method : str
        ``"auto"`` uses the exact frequency-side route for ``q = 2``;
        ``"midpoint"`` always uses quadrature.
    """

    box_halfwidth: float = 8.0
    points_per_wavelength: int = 8
    tail_tol: float = 1e-6
    max_halfwidth: float = 2.0**24
    max_points: int = 2**24
    method: str = "auto"

    def __post_init__(self):
        if not self.box_halfwidth > 0 or not self.tail_tol > 0:
            raise ValidationError("box_halfwidth and tail_tol must be positive")
        if int(self.points_per_wavelength) != self.points_per_wavelength or self.points_per_wavelength < 4:
            raise ValidationError("points_per_wavelength must be an integer >= 4")
        if self.method not in ("auto", "midpoint"):
            raise ValidationError(f"unknown quadrature method {self.method!r}")


@dataclass(frozen=True)
class NormResult:
    """Norm value with its error accounting (all in units of the norm).

    ``tail_bound`` is a certified bound for the part of the norm outside the
    box; ``discretization_estimate`` is the larger of the two last changes
    over the resolutions ``2h``, ``h``, ``h/2`` (the value uses ``h/2``).
    """

    value: float
    tail_bound: float = 0.0
    discretization_estimate: float = 0.0
    box_halfwidth: float = 0.0
    info: dict = field(default_factory=dict, compare=False)

    @property
    def error(self) -> float:
        return self.tail_bound + self.discretization_estimate


def _envelope_constants(m: int):
    prof = factor_profile(m)
    alpha = prof.amplitude * prof.peak
    beta = prof.amplitude * prof.tail_const / prof.dilation**2
    return alpha, beta


def envelope_tail_mass(m: int, q: float, L: float) -> float:
    """``int_{|x| > L} e(x)^q dx`` for the factor envelope ``e = min(alpha, beta/x^2)``."""
    alpha, beta = _envelope_constants(m)
    x0 = math.sqrt(beta / alpha)
    far = beta**q / (2.0 * q - 1.0)
    if L >= x0:
        one = far * L ** (1.0 - 2.0 * q)
    else:
        one = alpha**q * (x0 - L) + far * x0 ** (1.0 - 2.0 * q)
    return 2.0 * one


def envelope_total_mass(m: int, q: float) -> float:
    return envelope_tail_mass(m, q, 0.0)


def _tail_norm_bound(f, q: float, L: float) -> float:
    """Minkowski bound on ``||f 1_{outside [-L, L]^d}||_q`` from the envelopes."""
    total = 0.0
    for j in range(f.d):
        acc = 0.0
        for s, c in f.terms:
            part = envelope_tail_mass(s[j], q, L)
            for i, si in enumerate(s):
                if i != j:
                    part *= envelope_total_mass(si, q)
            acc += abs(c) * part ** (1.0 / q)
        total += acc
    return total


def _midpoints(L: float, h: float) -> tuple:
    n = max(1, int(math.ceil(L / h)))
    hh = L / n
    return (np.arange(n) + 0.5) * hh, hh


def _factor_mass(m: int, q: float, L: float, ppw: int) -> float:
    """``int_{-L}^{L} |factor_m|^q`` by composite midpoint."""
    x, hh = _midpoints(L, 2.0**-m / ppw)
    vals = np.abs(factor_profile(m)(x)) ** q
    return 2.0 * hh * math.fsum(vals.tolist())


def _single_term_norm(s, c, q: float, spec: QuadratureSpec) -> NormResult:
    """``|c| prod_j ||factor_{s_j}||_q`` with every factor integrated in 1-d."""
    value, rel_tail, disc_rel, boxes = abs(c), 0.0, 0.0, []
    ppw = spec.points_per_wavelength
    budget = spec.tail_tol / len(s)
    for m in s:
        L = spec.box_halfwidth
        # mass on the initial box is a lower bound for the full mass
        floor_mass = _factor_mass(m, q, L, ppw)
        while (1.0 + envelope_tail_mass(m, q, L) / floor_mass) ** (1.0 / q) - 1.0 > budget:
            if 2 * L > spec.max_halfwidth:
                rel = (1.0 + envelope_tail_mass(m, q, L) / floor_mass) ** (1.0 / q) - 1.0
                raise ToleranceError(f"tail bound {rel:.3e} above tolerance at the box cap", achieved=rel)
            L *= 2.0
        n_pts = L * 2 * ppw * 2.0**m
        if n_pts > spec.max_points:
            raise ToleranceError(
                f"quadrature for scale {m} would need {n_pts:.3g} points (cap {spec.max_points})"
            )
        fine = _factor_mass(m, q, L, 2 * ppw)
        crude = _factor_mass(m, q, L, ppw)
        crudest = _factor_mass(m, q, L, max(1, ppw // 2))
        rel = (1.0 + envelope_tail_mass(m, q, L) / fine) ** (1.0 / q) - 1.0
        fine_n, crude_n, crudest_n = (v ** (1.0 / q) for v in (fine, crude, crudest))
        disc_rel += max(abs(fine_n - crude_n), abs(crude_n - crudest_n)) / fine_n
        value *= fine_n
        rel_tail += rel
        boxes.append(L)
    return NormResult(
        value=value,
        tail_bound=value * rel_tail,
        discretization_estimate=value * disc_rel,
        box_halfwidth=max(boxes),
        info={"route": "separable", "boxes": boxes},
    )


def _grid_mass(f, q: float, L: float, ppw: int, max_points: int) -> float:
    axes, weights = [], []
    for j, smax in enumerate(f.max_scale()):
        x, hh = _midpoints(L, 2.0**-smax / ppw)
        axes.append(x)
        weights.append(hh)
    n_total = math.prod(len(a) for a in axes)
    if n_total > max_points:
        raise ToleranceError(f"tensor quadrature would need {n_total} nodes (cap {max_points})")
    factors = {}
    for s, _ in f.terms:
        for j, sj in enumerate(s):
            if (j, sj) not in factors:
                factors[(j, sj)] = factor_profile(sj)(axes[j])
    # tile along the first axis; fixed tile order keeps the reduction deterministic
    rest = math.prod(len(a) for a in axes[1:])
    tile = max(1, min(len(axes[0]), 2**22 // max(rest, 1)))
    partial = []
    for start in range(0, len(axes[0]), tile):
        sl = slice(start, start + tile)
        acc = np.zeros((len(axes[0][sl]),) + tuple(len(a) for a in axes[1:]))
        for s, c in f.terms:
            term = c * factors[(0, s[0])][sl]
            for j in range(1, f.d):
                term = np.multiply.outer(term, factors[(j, s[j])])
            acc += term
        partial.append(float(np.sum(np.abs(acc) ** q)))
    return 2.0**f.d * math.prod(weights) * math.fsum(partial)


def lq_norm(f, q: float, spec: QuadratureSpec = QuadratureSpec()) -> NormResult:
    """``||f||_q`` of a block sum on ``R^d`` with error accounting.

    Routes: empty sum -> 0; ``q = 2`` with ``method="auto"`` -> exact
    Plancherel sum; one term -> product of one-dimensional quadratures;
    otherwise tensor midpoint quadrature over ``[0, L]^d`` (every factor is
    even). The box is enlarged until the envelope tail bound is at most
    ``spec.tail_tol`` times the value.
    """
    q = float(q)
    if not q >= 1 or math.isinf(q):
        raise ValidationError(f"q = {q} must be finite and >= 1 (use sup_norm for q = inf)")
    if not f.terms:
        return NormResult(0.0, info={"route": "empty"})
    if q == 2.0 and spec.method == "auto":
        return NormResult(l2_norm_exact(f), info={"route": "plancherel"})
    if len(f.terms) == 1:
        s, c = f.terms[0]
        return _single_term_norm(s, c, q, spec)

    ppw = spec.points_per_wavelength
    L = spec.box_halfwidth
    mass = _grid_mass(f, q, L, 2 * ppw, spec.max_points)
    while True:
        value = mass ** (1.0 / q)
        tail_norm = _tail_norm_bound(f, q, L)
        tail = (mass + tail_norm**q) ** (1.0 / q) - value
        if tail <= spec.tail_tol * value:
            break
        # jump straight to the box size the tail bound asks for
        new_L = L
        while tail > spec.tail_tol * value and new_L < spec.max_halfwidth:
            new_L *= 2.0
            tail_norm = _tail_norm_bound(f, q, new_L)
            tail = (mass + tail_norm**q) ** (1.0 / q) - value
        if new_L >= spec.max_halfwidth and tail > spec.tail_tol * value:
            raise ToleranceError(f"tail bound {tail:.3e} above tolerance at the box cap", achieved=tail)
        L = new_L
        mass = _grid_mass(f, q, L, 2 * ppw, spec.max_points)
    coarse = _grid_mass(f, q, L, ppw, spec.max_points) ** (1.0 / q)
    coarsest = _grid_mass(f, q, L, max(1, ppw // 2), spec.max_points) ** (1.0 / q)
    return NormResult(
        value=value,
        tail_bound=tail,
        discretization_estimate=max(abs(value - coarse), abs(coarse - coarsest)),
        box_halfwidth=L,
        info={"route": "tensor-midpoint"},
    )


# ---------------------------------------------------------------------------
# uniform norm


def sup_upper_bound(f) -> float:
    """Minkowski bound ``sum_s |c_s| sup|A*_s|`` (sharp when all terms peak together)."""
    return math.fsum(abs(c) * block_sup(s) for s, c in f.terms)


def _coordinate_envelope(f, j: int, x: float) -> float:
    """Bound for ``|f|`` on the slab ``{|x_j| = x}``."""
    total = 0.0
    for s, c in f.terms:
        part = abs(c) * float(factor_profile(s[j]).envelope(x))
        for i, si in enumerate(s):
            if i != j:
                part *= factor_profile(si).sup
        total += part
    return total


def _search_radius(f, j: int, level: float) -> float:
    """Smallest ``R`` with envelope ``<= level`` for ``|x_j| >= R``."""
    if _coordinate_envelope(f, j, 0.0) <= level:
        return 0.0
    hi = 1.0
    while _coordinate_envelope(f, j, hi) > level:
        hi *= 2.0
        if hi > 2.0**40:
            return hi
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _coordinate_envelope(f, j, mid) > level:
            lo = mid
        else:
            hi = mid
    return hi


def sup_norm(f, resolution: int = 8, refine_steps: int = 2, max_points: int = 2**22) -> float:
    """Certified lower bound for ``sup |f|`` (a value actually attained).

    A structured grid on the non-negative orthant (every block kernel is
    even in each coordinate) with ``resolution`` points per finest period,
    seeded by a sweep along each axis and restricted to the region where the envelope can exceed ``|f(0)|``, is
    followed by ``refine_steps`` sweeps of coordinate-wise bounded scalar
    maximisation around the best node. ``resolution`` is rounded up to a
    power of two so that finer settings give nested grids.
    """
    if not f.terms:
        return 0.0
    res = 1 << max(0, int(math.ceil(math.log2(max(1, resolution)))))
    origin = np.zeros(f.d)
    best_x = origin
    best = abs(float(f(origin)))

    # a nonzero level keeps the search box finite when f vanishes at the origin
    for j, smax in enumerate(f.max_scale()):
        pts = np.zeros((res * 2 ** (smax + 1), f.d))
        pts[:, j] = np.arange(len(pts)) * 2.0**-smax / res
        vals = np.abs(f(pts))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_x = float(vals[k]), pts[k]
    if best == 0.0:
        return 0.0

    counts = []
    for j, smax in enumerate(f.max_scale()):
        R = _search_radius(f, j, best)
        counts.append(int(math.floor(R * 2.0**smax * res)) + 1)
    n_total = math.prod(counts)
    if n_total > max_points:
        raise ToleranceError(f"sup-norm search grid would need {n_total} nodes (cap {max_points})")
    axes = [np.arange(n) * 2.0**-smax / res for n, smax in zip(counts, f.max_scale())]
    if n_total > 1:
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, f.d)
        vals = np.abs(f(mesh))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_x = float(vals[k]), mesh[k]

    steps = [2.0**-smax / res for smax in f.max_scale()]
    x = np.array(best_x, dtype=float)
    for _ in range(refine_steps):
        for j in range(f.d):

            def neg(t, j=j):
                y = x.copy()
                y[j] = t
                return -abs(float(f(y)))

            lo, hi = x[j] - steps[j], x[j] + steps[j]
            r = minimize_scalar(neg, bounds=(lo, hi), method="bounded", options={"xatol": steps[j] * 1e-6})
            if -r.fun > best:
                best = -float(r.fun)
                x[j] = r.x
        steps = [h / 2.0 for h in steps]
    return best


def sup_norm_bounds(f, resolution: int = 8, refine_steps: int = 2) -> tuple:
    """``(lower, upper)`` bracket for ``sup |f|``."""
    return sup_norm(f, resolution, refine_steps), sup_upper_bound(f)


# ---------------------------------------------------------------------------
# Nikolskii inequality


@dataclass(frozen=True)
class NikolskiiResult:
    holds: bool
    slack: float
    lhs: float
    rhs: float


def nikolskii_check(s: Sequence[int], p: float, q: float) -> NikolskiiResult:
    """Check ``||A*_s||_q <= 2^d prod_j (2^{s_j})^{1/p - 1/q} ||A*_s||_p``.

    ``slack = lhs / rhs``; the inequality holds when ``slack <= 1``.
    """
    s = as_multi_index(s)
    p, q = float(p), float(q)
    if not p >= 1:
        raise ValidationError(f"p = {p} must be >= 1")
    if p > q:
        raise ValidationError(f"need p <= q, got p = {p}, q = {q}")
    inv = (1.0 / p) - (0.0 if math.isinf(q) else 1.0 / q)
    lhs = block_norm(s, q)
    rhs = 2.0 ** len(s) * 2.0 ** (sum(s) * inv) * block_norm(s, p)
    return NikolskiiResult(holds=lhs <= rhs, slack=lhs / rhs, lhs=lhs, rhs=rhs)
