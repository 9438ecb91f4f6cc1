"""Discrete Fourier pipeline on uniformly sampled grids.

The continuous transform on ``R^d`` is replaced by the DFT of samples on the
periodic box ``[-L, L)^d``. Grid frequencies are ``lam_k = k / (2L)``,
``k = -N/2 .. N/2 - 1``; every multiplier and indicator is evaluated at these
exact points. Results for block sums therefore carry a periodization error
from the ``x**-2`` decay of the kernels; it shrinks as ``L`` grows.
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from hypcross.blocksum import BlockSum, evaluate_tensor
from hypcross.cross import CrossSpec
from hypcross.errors import NumericalConsistencyError, NyquistError, ValidationError
from hypcross.kernels import as_multi_index, dyadic_index, factor_multiplier

IMAG_RESIDUE_TOL = 1e-10

PERIODIZATION_NOTE = (
    "grid results use periodization on [-L, L)^d; block-kernel content is "
    "aliased with an error decaying like 1/L per coordinate"
)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class SampledGrid:
    """Samples on ``x_i = -L + i h``, ``h = 2L / N``, in every coordinate.

    ``values`` has shape ``(N,) * d`` and is read-only. ``band`` optionally
    records the declared per-coordinate band limit of the content.
    """

    d: int
    L: float
    N: int
    values: np.ndarray
    band: Optional[tuple] = None

    def __post_init__(self):
        if not _is_pow2(int(self.N)):
            raise ValidationError(f"points per dimension N = {self.N} must be a power of two")
        if not self.L > 0:
            raise ValidationError(f"box half-width L = {self.L} must be positive")
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.N,) * self.d:
            raise ValidationError(f"values shape {vals.shape} != {(self.N,) * self.d}")
        if self.band is not None:
            for b in self.band:
                if self.h > 1.0 / (2.0 * b) * (1 + 1e-12):
                    raise NyquistError(f"spacing {self.h} exceeds 1/(2B) for band limit {b}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    def frequencies(self) -> np.ndarray:
        """``k / (2L)`` in FFT order."""
        return np.fft.fftfreq(self.N, d=self.h)

    def with_values(self, values) -> "SampledGrid":
        return SampledGrid(self.d, self.L, self.N, values, self.band)

    def l2(self) -> float:
        return math.sqrt(self.h**self.d * float(np.sum(self.values**2)))

    def lp(self, p: float) -> float:
        if math.isinf(p):
            return float(np.max(np.abs(self.values))) if self.values.size else 0.0
        return (self.h**self.d * float(np.sum(np.abs(self.values) ** p))) ** (1.0 / p)

    def sup(self) -> float:
        return self.lp(math.inf)


def required_points(L: float, band: float) -> int:
    """Smallest power of two ``N`` with ``2L/N <= 1/(2 band)``."""
    need = 4.0 * L * band
    return 1 << max(0, math.ceil(math.log2(need) - 1e-12)) if need > 1 else 1


def sample(f: BlockSum, L: float, N: int) -> SampledGrid:
    """Exact pointwise samples of ``f`` on the grid; checks the Nyquist rule
    ``h <= 1 / (2 * 2**max_s_j)`` in every coordinate."""
    if not _is_pow2(int(N)):
        raise ValidationError(f"N = {N} must be a power of two")
    band = tuple(2.0**m for m in f.max_scale())
    h = 2.0 * L / N
    for j, b in enumerate(band):
        if h > 1.0 / (2.0 * b):
            need = required_points(L, b)
            raise NyquistError(
                f"grid spacing {h} too coarse for band limit {b} in coordinate {j}: "
                f"need N >= {need} at L = {L}",
                required_n=need,
            )
    x = -L + h * np.arange(N)
    values = evaluate_tensor(f, [x] * f.d)
    return SampledGrid(f.d, float(L), int(N), values, band)


def _apply(g: SampledGrid, mask: np.ndarray) -> SampledGrid:
    spec = np.fft.fftn(g.values)
    out = np.fft.ifftn(spec * mask)
    scale = max(1.0, float(np.max(np.abs(g.values)))) if g.values.size else 1.0
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if residue > IMAG_RESIDUE_TOL * scale:
        raise NumericalConsistencyError(f"imaginary residue {residue:.3e} after multiplier")
    return g.with_values(out.real)


def _outer(per_axis: Sequence[np.ndarray]) -> np.ndarray:
    mask = per_axis[0]
    for m in per_axis[1:]:
        mask = np.multiply.outer(mask, m)
    return mask


def _check_dim(g: SampledGrid, s) -> tuple:
    s = as_multi_index(s)
    if len(s) != g.d:
        raise ValidationError(f"index {s} has dimension {len(s)}, grid has {g.d}")
    return s


def block_indicator(g: SampledGrid, s: Sequence[int]) -> np.ndarray:
    """Indicator of ``Q*_{2^s}`` on the grid frequencies (FFT order)."""
    s = _check_dim(g, s)
    idx = dyadic_index(g.frequencies())
    return _outer([(idx == sj).astype(float) for sj in s])


def delta_star(g: SampledGrid, s: Sequence[int]) -> SampledGrid:
    """Sharp dyadic block: inverse DFT of ``1_{Q*_{2^s}}`` times the DFT of ``g``."""
    return _apply(g, block_indicator(g, s))


def vp_block(g: SampledGrid, s: Sequence[int]) -> SampledGrid:
    """Smooth de la Vallée Poussin block: DFT multiplier ``prod_j (k_{s_j} - k_{s_j-1})``."""
    s = _check_dim(g, s)
    lam = g.frequencies()
    return _apply(g, _outer([factor_multiplier(sj, lam) for sj in s]))


def cross_indicator(g: SampledGrid, spec: CrossSpec) -> np.ndarray:
    """Indicator of the step hyperbolic cross ``Q_n^gamma`` on the grid frequencies."""
    if spec.d != g.d:
        raise ValidationError(f"cross dimension {spec.d} does not match grid dimension {g.d}")
    idx = dyadic_index(g.frequencies())
    weighted = [idx * gj for gj in spec.gamma]
    total = weighted[0]
    for w in weighted[1:]:
        total = np.add.outer(total, w)
    return (total <= spec.n * (1 + 1e-12) + 1e-12).astype(float)


def project_sharp(g: SampledGrid, spec: CrossSpec) -> SampledGrid:
    """``S_{Q_n^gamma} g``: one multiplier pass with the union indicator of the cross."""
    return _apply(g, cross_indicator(g, spec))


def max_block_index(g: SampledGrid) -> int:
    """Largest dyadic scale present among the grid frequencies."""
    return int(dyadic_index(np.max(np.abs(g.frequencies()))))


def all_blocks(g: SampledGrid) -> list:
    """Every block label needed to partition the grid frequencies."""
    top = max_block_index(g)
    return [tuple(s) for s in itertools.product(range(top + 1), repeat=g.d)]


def reconstruct(g: SampledGrid, top: int) -> SampledGrid:
    """``sum over s with max_j s_j <= top`` of ``vp_block(g, s)``."""
    acc = np.zeros_like(g.values)
    for s in itertools.product(range(top + 1), repeat=g.d):
        acc = acc + vp_block(g, s).values
    return g.with_values(acc)


def littlewood_paley_check(g: SampledGrid, p: float = 2.0) -> float:
    """``||(sum_s |delta*_s g|^2)^(1/2)||_p / ||g||_p`` with grid norms.

    Equals 1 up to rounding when ``p = 2``; other ``p`` are diagnostics.
    A zero grid gives 1 by convention.
    """
    if not np.any(g.values):
        return 1.0
    square = np.zeros_like(g.values)
    for s in all_blocks(g):
        square = square + delta_star(g, s).values ** 2
    return g.with_values(np.sqrt(square)).lp(p) / g.lp(p)


@dataclass(frozen=True)
class SharpResidual:
    """Grid-level ``g - S_{Q_n^gamma} g`` summary."""

    l2: float
    sup: float
    relative_l2: float
    note: str = PERIODIZATION_NOTE


def sharp_residual(g: SampledGrid, spec: CrossSpec) -> SharpResidual:
    r = g.with_values(g.values - project_sharp(g, spec).values)
    base = g.l2()
    return SharpResidual(l2=r.l2(), sup=r.sup(), relative_l2=r.l2() / base if base else 0.0)


# ---------------------------------------------------------------------------
# file format: JSON header + raw little-endian float64 payload (row-major)


def write_grid(g: SampledGrid, header_path, payload_path=None) -> None:
    header_path = os.fspath(header_path)
    if payload_path is None:
        payload_path = os.path.splitext(header_path)[0] + ".bin"
    payload_path = os.fspath(payload_path)
    np.ascontiguousarray(g.values, dtype="<f8").tofile(payload_path)
    rel = os.path.relpath(payload_path, os.path.dirname(os.path.abspath(header_path)))
    with open(header_path, "w", encoding="utf-8") as fh:
        json.dump({"d": g.d, "L": g.L, "N": g.N, "payload": rel}, fh)
        fh.write("\n")


def read_grid(header_path) -> SampledGrid:
    header_path = os.fspath(header_path)
    with open(header_path, encoding="utf-8") as fh:
        try:
            head = json.load(fh)
            d, L, N, payload = int(head["d"]), float(head["L"]), int(head["N"]), head["payload"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed grid header {header_path}: {exc}") from None
    if not os.path.isabs(payload):
        payload = os.path.join(os.path.dirname(os.path.abspath(header_path)), payload)
    data = np.fromfile(payload, dtype="<f8")
    if data.size != N**d:
        raise ValidationError(f"payload has {data.size} values, header implies {N ** d}")
    return SampledGrid(d, L, N, data.reshape((N,) * d).astype(float))
