"""Step hyperbolic cross index sets, dyadic layers and lacunary tail sums."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from hypcross.errors import ToleranceError, ValidationError

# slack for comparing weighted sums (s, gamma) against integer levels
_REL_SLACK = 1e-12


def _as_direction(gamma: Sequence[float], name: str = "gamma") -> tuple:
    values = tuple(float(g) for g in gamma)
    if not values:
        raise ValidationError(f"{name} must have at least one coordinate")
    for j, g in enumerate(values):
        if not math.isfinite(g) or g < 1.0:
            raise ValidationError(f"{name}[{j}] = {g} must be >= 1")
    if min(values) != 1.0:
        raise ValidationError(f"min of {name} must equal 1, got {min(values)}")
    return values


@dataclass(frozen=True)
class CrossSpec:
    """Step hyperbolic cross ``{s : (s, gamma) <= n}``.

    ``alt_gamma`` is an optional secondary direction that agrees with
    ``gamma`` where ``gamma_j = 1`` and lies strictly between 1 and
    ``gamma_j`` elsewhere.
    """

    gamma: tuple
    n: int
    alt_gamma: Optional[tuple] = None

    def __post_init__(self):
        gamma = _as_direction(self.gamma)
        object.__setattr__(self, "gamma", gamma)
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValidationError(f"cross level n = {self.n!r} must be a non-negative integer")
        object.__setattr__(self, "n", int(self.n))
        if self.alt_gamma is not None:
            alt = tuple(float(g) for g in self.alt_gamma)
            if len(alt) != len(gamma):
                raise ValidationError("alt_gamma must have the same dimension as gamma")
            for j, (g, a) in enumerate(zip(gamma, alt)):
                if g == 1.0 and a != 1.0:
                    raise ValidationError(f"alt_gamma[{j}] must equal gamma[{j}] = 1")
                if g > 1.0 and not 1.0 < a < g:
                    raise ValidationError(f"alt_gamma[{j}] = {a} must lie strictly in (1, {g})")
            object.__setattr__(self, "alt_gamma", alt)

    @property
    def d(self) -> int:
        return len(self.gamma)

    def contains(self, s: Sequence[int]) -> bool:
        return _dot(s, self.gamma) <= self.n * (1.0 + _REL_SLACK) + _REL_SLACK


def _dot(s, w) -> float:
    return math.fsum(si * wi for si, wi in zip(s, w))


def _bounded(weights: tuple, hi: float, strict: bool) -> Iterator[tuple]:
    """Lexicographic enumeration of ``s >= 0`` with ``(s, weights) <= hi``
    (``< hi`` when ``strict``)."""
    d = len(weights)
    slack = _REL_SLACK * max(1.0, abs(hi))

    def ok(total):
        return total < hi - slack if strict else total <= hi + slack

    def rec(j, prefix, total):
        if j == d:
            yield tuple(prefix)
            return
        k = 0
        while ok(total + k * weights[j]):
            prefix.append(k)
            yield from rec(j + 1, prefix, total + k * weights[j])
            prefix.pop()
            k += 1

    if ok(0.0):
        yield from rec(0, [], 0.0)


def enumerate_cross(spec: CrossSpec) -> list:
    """All ``s`` with ``(s, gamma) <= n`` in lexicographic order."""
    return list(_bounded(spec.gamma, float(spec.n), strict=False))


def enumerate_layer(d: int, m: int) -> list:
    """All ``s`` in ``Z_+^d`` with ``||s||_1 = m``, lexicographic."""
    if d < 1:
        raise ValidationError(f"dimension d = {d} must be >= 1")
    if m < 0:
        raise ValidationError(f"layer index m = {m} must be >= 0")

    def rec(j, rest):
        if j == d - 1:
            yield (rest,)
            return
        for k in range(rest + 1):
            for tail in rec(j + 1, rest - k):
                yield (k,) + tail

    return list(rec(0, m))


def cross_size(d: int, n: int) -> int:
    """``|{s : ||s||_1 <= n}| = C(n + d, d)``."""
    return math.comb(n + d, d)


def _binom_real(x: float, d: int) -> float:
    """``prod_{i=1..d} (x + i) / i``: bounds ``C(floor(x) + d, d)`` from above."""
    out = 1.0
    for i in range(1, d + 1):
        out *= (x + i) / i
    return out


def lacunary_tail_sum(
    weight_gamma: Sequence[float],
    constraint_gamma: Sequence[float],
    alpha: float,
    n: int,
    tol: float = 1e-13,
    max_shells: int = 20000,
) -> float:
    """``sum over s with (s, constraint) >= n of 2**(-alpha (s, weight))``.

    Shells ``m <= (s, constraint) < m + 1`` are added for ``m = n, n+1, ...``
    until a certified bound on the remaining shells drops below ``tol``.
    The bound uses ``(s, weight) >= kappa (s, constraint)`` with
    ``kappa = min_j weight_j / constraint_j`` and the count of indices of a
    shell is bounded by a binomial in ``||s||_1``.
    """
    w = tuple(float(g) for g in weight_gamma)
    c = tuple(float(g) for g in constraint_gamma)
    if len(w) != len(c) or not w:
        raise ValidationError("weight and constraint vectors must have the same non-zero length")
    if min(w) <= 0 or min(c) <= 0:
        raise ValidationError("weight and constraint entries must be positive")
    if not alpha > 0:
        raise ValidationError(f"alpha = {alpha} must be > 0")
    if not tol > 0:
        raise ValidationError(f"tol = {tol} must be > 0")
    d = len(w)
    kappa = min(wi / ci for wi, ci in zip(w, c))
    c_min = min(c)
    m0 = max(int(math.floor(n)), 0)

    def shell_bound(m):
        return _binom_real((m + 1) / c_min, d) * 2.0 ** (-alpha * kappa * m)

    def tail_bound(m_next):
        # bound for sum over shells m >= m_next
        x = (m_next + 1) / c_min
        ratio = ((x + 1.0 / c_min + 1.0) / (x + 1.0)) ** d * 2.0 ** (-alpha * kappa)
        if ratio >= 1.0:
            return math.inf
        return shell_bound(m_next) / (1.0 - ratio)

    partial = []
    m = m0
    while True:
        lo = float(n) if m == m0 else float(m)
        terms = [
            2.0 ** (-alpha * _dot(s, w))
            for s in _bounded(c, m + 1.0, strict=True)
            if _dot(s, c) >= lo - _REL_SLACK * max(1.0, lo)
        ]
        partial.append(math.fsum(terms))
        m += 1
        if tail_bound(m) <= tol:
            break
        if m - m0 > max_shells:
            raise ToleranceError(
                f"tail bound {tail_bound(m):.3e} still above tol after {max_shells} shells",
                achieved=tail_bound(m),
            )
    return math.fsum(partial)
