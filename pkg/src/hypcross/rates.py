"""Rate experiments for cross truncation errors of extremal block sums.

For each level ``n`` the extremal function lives on the layer
``||s||_1 = n + 1`` just outside the cross, so the truncation error is the
norm of the function itself. Reports compare it against the predicted order

* ``q = inf``: ``2**(-n (r1 - 1)) n**((nu - 1)(1 - 1/theta))``
* ``q < inf``: ``2**(-n (r1 - 1 + 1/q)) n**((nu - 1)(1/q - 1/theta)_+)``

through ratio brackets, step ratios and a least-squares exponent fit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from hypcross.blocksum import BlockSum, project_cross
from hypcross.cross import CrossSpec, lacunary_tail_sum
from hypcross.errors import DomainError, NumericalConsistencyError, ValidationError
from hypcross.extremal import ExtremalSpec, make_extremal
from hypcross.gridpath import PERIODIZATION_NOTE, required_points, sample, sharp_residual
from hypcross.kernels import as_multi_index, l1
from hypcross.norms import QuadratureSpec, block_norm, lq_norm, sup_norm
from hypcross.smoothness import SmoothnessProfile

# grids beyond this many samples are skipped by the sharp-projection diagnostic
DIAGNOSTIC_MAX_SAMPLES = 2**22
DIAGNOSTIC_BOX = 64.0


def _plus(x: float) -> float:
    return max(x, 0.0)


def rate_exponents(profile: SmoothnessProfile, theta: float, q: float) -> tuple:
    """``(a, b)`` with predicted rate ``2**(a n) n**b``.

    Raises
    ------
    DomainError
        If ``r_1 > 1`` (``q = inf``) or ``r_1 > 1 - 1/q`` fails.
    """
    theta, q = float(theta), float(q)
    if not theta >= 1:
        raise ValidationError(f"theta = {theta} must be in [1, inf]")
    if not q > 1:
        raise ValidationError(f"q = {q} must be in (1, inf]")
    r1, nu = profile.r_min, profile.nu
    inv_theta = 0.0 if math.isinf(theta) else 1.0 / theta
    if math.isinf(q):
        if not r1 > 1:
            raise DomainError(f"hypothesis r_1 > 1 fails: r_1 = {r1}")
        return -(r1 - 1.0), (nu - 1) * (1.0 - inv_theta)
    if not r1 > 1.0 - 1.0 / q:
        raise DomainError(f"hypothesis r_1 > 1 - 1/q fails: r_1 = {r1}, 1 - 1/q = {1.0 - 1.0 / q}")
    return -(r1 - 1.0 + 1.0 / q), (nu - 1) * _plus(1.0 / q - inv_theta)


def predicted_rate(profile: SmoothnessProfile, theta: float, q: float, n: int) -> float:
    """Predicted order of the truncation error at level ``n`` (constant 1)."""
    a, b = rate_exponents(profile, theta, q)
    return 2.0 ** (a * n) * (1.0 if b == 0 else float(n) ** b)


@dataclass(frozen=True)
class RateRow:
    n: int
    error: float
    predicted: float
    ratio: float


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float


def fit_rate(rows: Sequence, log_power: float) -> FitResult:
    """Least squares for ``log2 error = a n + b log2 n + c`` with ``b`` fixed.

    Returns the slope ``a``, intercept ``c`` and RMS residual.
    """
    if len(rows) < 4:
        raise ValidationError(f"need at least 4 rows to fit a rate, got {len(rows)}")
    n = np.array([float(r.n) for r in rows])
    if np.ptp(n) == 0:
        raise ValidationError("degenerate design: all n are equal")
    err = np.array([r.error for r in rows])
    if np.any(err <= 0):
        raise ValidationError("errors must be positive to fit a rate")
    y = np.log2(err) - log_power * np.log2(n)
    design = np.column_stack([n, np.ones_like(n)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return FitResult(float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2))))


@dataclass
class RateReport:
    """Rows in ascending ``n`` with ratio spread, fitted slope and parameters."""

    rows: list
    fitted_slope: Optional[float]
    ratio_spread: float
    params: dict
    fit_residual: Optional[float] = None
    diagnostics: list = field(default_factory=list)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([r.ratio for r in self.rows])

    def step_ratios(self) -> list:
        """``error(n+1) / error(n)`` for consecutive rows."""
        return [b.error / a.error for a, b in zip(self.rows, self.rows[1:]) if b.n == a.n + 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "error", "predicted", "ratio"])
        for r in self.rows:
            w.writerow([r.n, "%.17g" % r.error, "%.17g" % r.predicted, "%.17g" % r.ratio])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "fitted_slope": self.fitted_slope,
            "fit_residual": self.fit_residual,
            "ratio_spread": self.ratio_spread,
            "params": self.params,
            "diagnostics": self.diagnostics,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _spread(values: Iterable[float]) -> float:
    values = list(values)
    return max(values) / min(values) if values else 1.0


def _map(fn, items, threads: Optional[int]):
    items = list(items)
    if threads is not None and threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sharp_projection_diagnostic(f: BlockSum, spec: CrossSpec, L: float = DIAGNOSTIC_BOX) -> dict:
    """Grid residual of the sharp cross projection, or a skip note when the
    required grid is too large."""
    band = 2.0 ** max(f.max_scale())
    N = required_points(L, band)
    if N**f.d > DIAGNOSTIC_MAX_SAMPLES:
        return {"n": spec.n, "skipped": f"grid would need {N}^{f.d} samples"}
    res = sharp_residual(sample(f, L, N), spec)
    return {
        "n": spec.n,
        "L": L,
        "N": N,
        "residual_l2": res.l2,
        "residual_sup": res.sup,
        "relative_l2": res.relative_l2,
        "note": PERIODIZATION_NOTE,
    }


def _run(profile, theta, q, n_values, kind_for, error_of, params, threads, diagnostics):
    n_values = sorted({int(n) for n in n_values})
    if not n_values:
        raise ValidationError("empty n range")
    a, b = rate_exponents(profile, theta, q)
    gamma = (1.0,) * profile.d

    def one(n):
        f = make_extremal(ExtremalSpec(profile, theta, n, kind_for(n)))
        cross = CrossSpec(gamma, n)
        if project_cross(f, cross).terms:
            raise NumericalConsistencyError(f"extremal function at n = {n} meets the cross")
        err = error_of(f)
        pred = predicted_rate(profile, theta, q, n)
        diag = sharp_projection_diagnostic(f, cross) if diagnostics else None
        return RateRow(n, err, pred, err / pred), diag

    results = _map(one, n_values, threads)
    rows = [r for r, _ in results]
    fit = fit_rate(rows, b) if len(rows) >= 4 else None
    params = dict(params, d=profile.d, r=list(profile.r), theta=_token(theta), q=_token(q),
                  theory_slope=a, log_power=b)
    return RateReport(
        rows=rows,
        fitted_slope=fit.slope if fit else None,
        ratio_spread=_spread(r.ratio for r in rows),
        params=params,
        fit_residual=fit.residual if fit else None,
        diagnostics=[d for _, d in results if d is not None],
    )


def _token(x: float):
    return "inf" if math.isinf(x) else x


def _require_isotropic(profile: SmoothnessProfile):
    if not profile.is_isotropic:
        raise ValidationError("rate experiments use gamma = (1, ..., 1); the profile must be isotropic")


def run_theorem1(
    profile: SmoothnessProfile,
    theta: float,
    n_values: Iterable[int],
    resolution: int = 8,
    refine_steps: int = 2,
    threads: Optional[int] = None,
    diagnostics: bool = False,
) -> RateReport:
    """Uniform-norm truncation error of the layer extremal functions."""
    theta = float(theta)
    rate_exponents(profile, theta, math.inf)
    _require_isotropic(profile)
    kind = "layer_sup" if math.isinf(theta) else "layer_theta"
    return _run(
        profile, theta, math.inf, n_values,
        kind_for=lambda n: kind,
        error_of=lambda f: sup_norm(f, resolution=resolution, refine_steps=refine_steps),
        params={"kind": kind, "norm": "sup", "resolution": resolution, "refine_steps": refine_steps},
        threads=threads,
        diagnostics=diagnostics,
    )


def theorem2_kind(theta: float, q: float) -> str:
    """Single block for ``theta <= q``, weighted layer for ``q < theta < inf``,
    plain layer for ``theta = inf``."""
    if math.isinf(theta):
        return "layer_sup"
    return "single" if theta <= q else "layer_theta"


def run_theorem2(
    profile: SmoothnessProfile,
    theta: float,
    q: float,
    n_values: Iterable[int],
    quad: QuadratureSpec = QuadratureSpec(),
    threads: Optional[int] = None,
    diagnostics: bool = False,
) -> RateReport:
    """``L_q`` truncation error (``1 < q < inf``) of the extremal functions."""
    theta, q = float(theta), float(q)
    if math.isinf(q):
        raise ValidationError("run_theorem2 needs finite q; use run_theorem1 for q = inf")
    rate_exponents(profile, theta, q)
    _require_isotropic(profile)
    kind = theorem2_kind(theta, q)
    return _run(
        profile, theta, q, n_values,
        kind_for=lambda n: kind,
        error_of=lambda f: lq_norm(f, q, quad).value,
        params={
            "kind": kind,
            "norm": f"L{q:g}",
            "quad_box_halfwidth": quad.box_halfwidth,
            "quad_points_per_wavelength": quad.points_per_wavelength,
            "quad_tail_tol": quad.tail_tol,
            "quad_method": quad.method,
        },
        threads=threads,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# bracket checks for the block-norm and lacunary-sum estimates


@dataclass(frozen=True)
class BracketReport:
    """``ratio`` values over a parameter set and their spread ``max / min``."""

    labels: tuple
    ratios: tuple
    min_ratio: float
    max_ratio: float
    bracket: float

    def to_dict(self) -> dict:
        return {
            "labels": [list(x) if isinstance(x, tuple) else x for x in self.labels],
            "ratios": list(self.ratios),
            "min_ratio": self.min_ratio,
            "max_ratio": self.max_ratio,
            "bracket": self.bracket,
        }

    def to_csv(self, label_name: str = "label") -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([label_name, "ratio"])
        for lab, r in zip(self.labels, self.ratios):
            lab = " ".join(str(v) for v in lab) if isinstance(lab, tuple) else lab
            w.writerow([lab, "%.17g" % r])
        return buf.getvalue()


def _bracket(labels, ratios) -> BracketReport:
    if not ratios:
        raise ValidationError("empty parameter set")
    lo, hi = min(ratios), max(ratios)
    return BracketReport(tuple(labels), tuple(ratios), lo, hi, hi / lo)


def verify_lemma_brackets(s_set: Iterable[Sequence[int]], p: float) -> BracketReport:
    """``||A*_s||_p 2**(-||s||_1 (1 - 1/p))`` over ``s_set`` (``p = inf`` allowed)."""
    p = float(p)
    labels = [as_multi_index(s) for s in s_set]
    power = 1.0 if math.isinf(p) else 1.0 - 1.0 / p
    ratios = [block_norm(s, p) * 2.0 ** (-l1(s) * power) for s in labels]
    return _bracket(labels, ratios)


def verify_lacunary_sum(
    gamma: Sequence[float],
    alpha: float,
    n_values: Iterable[int],
    alt_gamma: Optional[Sequence[float]] = None,
) -> BracketReport:
    """Ratio of the lacunary tail sum to its predicted order over ``n``.

    Without ``alt_gamma`` the sum is over ``(s, gamma) >= n`` with weight
    ``gamma`` and the order is ``2**(-alpha n) n**(d-1)``. With ``alt_gamma``
    the constraint uses ``alt_gamma``, the weight ``gamma`` and the order is
    ``2**(-alpha n) n**(nu-1)``, ``nu = #{j : gamma_j = 1}``.
    """
    spec = CrossSpec(tuple(gamma), 0, None if alt_gamma is None else tuple(alt_gamma))
    d = spec.d
    constraint = spec.gamma if spec.alt_gamma is None else spec.alt_gamma
    power = d - 1 if spec.alt_gamma is None else sum(1 for g in spec.gamma if g == 1.0) - 1
    labels, ratios = [], []
    for n in sorted({int(n) for n in n_values}):
        total = lacunary_tail_sum(spec.gamma, constraint, alpha, n)
        labels.append(n)
        ratios.append(total / (2.0 ** (-alpha * n) * float(n) ** power))
    return _bracket(labels, ratios)
