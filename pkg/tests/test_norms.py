import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from hypcross.blocksum import BlockSum
from hypcross.errors import ValidationError
from hypcross.kernels import factor_profile
from hypcross.norms import (
    QuadratureSpec,
    block_lp_norm,
    block_lp_norm_relerr,
    block_norm,
    envelope_tail_mass,
    factor_lp_norm,
    l2_norm_exact,
    lq_norm,
    multiplier_inner,
    nikolskii_check,
    reference_integral,
    sup_norm,
    sup_norm_bounds,
    sup_upper_bound,
)


def exact_factor_square(m):
    """Exact ``int (k_m - k_{m-1})^2`` with rational arithmetic on linear pieces."""

    def val(x):
        def k(j):
            if j == -1:
                return Fraction(0)
            if j == 0:
                return max(Fraction(0), 1 - abs(x))
            return min(Fraction(1), max(Fraction(0), 2 * (1 - abs(x) / Fraction(2) ** j)))

        return k(m) - k(m - 1)

    knots = [Fraction(2) ** (m - 2) * i for i in range(0, 5)] if m >= 2 else [Fraction(i) for i in range(3)]
    total = Fraction(0)
    for a, b in zip(knots, knots[1:]):
        fa, fb = val(a), val(b)
        total += (b - a) * (fa * fa + fa * fb + fb * fb) / 3
    return 2 * total


@pytest.mark.parametrize("m, expected", [(0, Fraction(2, 3)), (1, Fraction(4, 3)), (2, Fraction(2)), (5, Fraction(16))])
def test_exact_square_integrals(m, expected):
    assert exact_factor_square(m) == expected
    assert multiplier_inner(m, m) == pytest.approx(float(expected), rel=1e-14)


def test_l2_block_values():
    assert block_lp_norm((3,), 2.0) == pytest.approx(2.0, rel=1e-9)
    assert block_lp_norm((1,), 2.0) == pytest.approx(math.sqrt(4 / 3), rel=1e-9)
    assert block_lp_norm((0,), 2.0) == pytest.approx(math.sqrt(2 / 3), rel=1e-9)
    for s in [(2, 5), (3, 3, 4)]:
        expected = math.prod(2.0 ** (m - 1) for m in s)
        assert block_lp_norm(s, 2.0) ** 2 == pytest.approx(expected, rel=1e-9)
        assert l2_norm_exact(BlockSum.single(s)) ** 2 == pytest.approx(expected, rel=1e-12)


def test_reference_integrals_closed_forms():
    assert reference_integral(0, 1.0).value == pytest.approx(math.pi / 2, rel=1e-9)
    assert reference_integral(0, 2.0).value == pytest.approx(math.pi / 3, rel=1e-9)
    assert reference_integral(1, 2.0).value == pytest.approx(math.pi / 6, rel=1e-9)
    assert reference_integral(2, 2.0).value == pytest.approx(math.pi, rel=1e-9)
    for b in (0, 1, 2):
        for p in (1.0, 1.5, 2.0, 3.0):
            r = reference_integral(b, p)
            assert r.error < 1e-6 * r.value


@pytest.mark.parametrize("m", [0, 1, 2, 3])
@pytest.mark.parametrize("p", [1.0, 3.0])
def test_factor_norm_against_adaptive_quadrature(m, p):
    prof = factor_profile(m)
    zeros = [z / prof.dilation + k * math.pi / prof.dilation for k in range(200) for z in prof.zeros]
    zeros = sorted(z for z in zeros if 0 < z < 200 * math.pi / prof.dilation)
    head = sum(quad(lambda x: abs(prof(x)) ** p, a, b, epsabs=1e-13)[0] for a, b in zip([0.0] + zeros, zeros))
    tail = envelope_tail_mass(m, p, zeros[-1])
    oracle_lo = (2 * head) ** (1 / p)
    oracle_hi = (2 * (head + tail)) ** (1 / p)
    assert oracle_lo * (1 - 1e-7) <= factor_lp_norm(m, p) <= oracle_hi * (1 + 1e-7)


def test_lp_norm_scaling_constancy():
    for p in (1.0, 2.0, 4.0):
        ref = block_lp_norm((1, 1), p) * 2.0 ** (-2 * (1 - 1 / p))
        vals = [block_lp_norm((a, b), p) * 2.0 ** (-(a + b) * (1 - 1 / p)) for a in range(2, 7) for b in range(2, 7)]
        assert np.ptp(vals) <= 1e-12 * max(vals)
        assert ref > 0


def test_lp_norm_errors():
    with pytest.raises(ValidationError):
        block_lp_norm((1,), 0.5)
    assert block_norm((3,), math.inf) == 6.0
    assert block_lp_norm_relerr((3, 2), 1.0) < 1e-6


def test_lq_norm_empty_and_routes():
    assert lq_norm(BlockSum.empty(2), 1.5).value == 0.0
    f = BlockSum.single((3,))
    assert lq_norm(f, 2.0).info["route"] == "plancherel"
    r = lq_norm(f, 2.0, QuadratureSpec(method="midpoint"))
    assert r.value == pytest.approx(2.0, abs=r.error + 1e-6)


@pytest.mark.parametrize("s", [(2,), (0, 3), (1, 2)])
def test_lq_quadrature_matches_reference(s):
    f = BlockSum.single(s, 0.7)
    r = lq_norm(f, 3.0, QuadratureSpec(tail_tol=1e-5, points_per_wavelength=16))
    ref = 0.7 * block_lp_norm(s, 3.0)
    assert abs(r.value - ref) <= r.error + ref * block_lp_norm_relerr(s, 3.0) + 1e-9


def test_lq_multi_term_against_plancherel():
    f = BlockSum.from_terms(2, {(1, 2): 1.0, (2, 1): -0.5, (0, 0): 0.25})
    r = lq_norm(f, 2.0, QuadratureSpec(method="midpoint", tail_tol=1e-3, points_per_wavelength=8))
    assert abs(r.value - l2_norm_exact(f)) <= r.error + 1e-9


def test_single_block_step_ratio_q4():
    values = [lq_norm(BlockSum.single((n + 1,), 2.0 ** (-1.5 * n)), 4.0, QuadratureSpec(tail_tol=1e-6)).value
              for n in (4, 5)]
    assert values[1] / values[0] == pytest.approx(2.0 ** -(1.5 - 1 + 0.25), rel=0.01)


def test_lq_norm_validation():
    with pytest.raises(ValidationError):
        lq_norm(BlockSum.single((1,)), math.inf)
    with pytest.raises(ValidationError):
        QuadratureSpec(points_per_wavelength=2)


def test_sup_norm_single_blocks():
    for s in [(2,), (5,), (2, 3), (0, 4)]:
        assert sup_norm(BlockSum.single(s)) == pytest.approx(math.prod(factor_profile(m).sup for m in s))


def test_sup_norm_homogeneous_and_bracketed():
    f = BlockSum.from_terms(2, {(1, 3): 1.0, (2, 2): -0.7, (3, 1): 0.4})
    lo, hi = sup_norm_bounds(f)
    assert lo <= hi
    assert sup_norm(f.scale(2.5)) == pytest.approx(2.5 * sup_norm(f), rel=1e-12)
    assert sup_upper_bound(f) == hi


def test_sup_norm_finds_off_origin_peak():
    # opposite-sign terms cancel at the origin, so the sup sits elsewhere
    f = BlockSum.from_terms(1, {(2,): 1.0, (3,): -0.5})
    assert abs(f([0.0])) < 1e-12
    x = np.linspace(-4, 4, 200001)
    assert sup_norm(f) >= np.max(np.abs(f(x[:, None]))) - 1e-9


def test_sup_norm_monotone_in_resolution():
    f = BlockSum.from_terms(2, {(2, 3): 1.0, (3, 2): -0.9})
    vals = [sup_norm(f, resolution=r, refine_steps=0) for r in (4, 8, 16)]
    assert vals[0] <= vals[1] <= vals[2]


def test_layer_sum_origin_value():
    n = 5
    f = BlockSum.from_terms(2, {(a, n + 1 - a): 1.0 for a in range(n + 2)})
    phi = lambda m: 1.0 if m == 0 else (2.0 if m == 1 else 3 * 2.0 ** (m - 2))
    assert f([0.0, 0.0]) == pytest.approx(sum(phi(a) * phi(n + 1 - a) for a in range(n + 2)))


@pytest.mark.parametrize("s, p, q", [((3,), 1.0, math.inf), ((2, 2), 1.0, 2.0), ((4, 1), 2.0, math.inf), ((2,), 2.0, 2.0)])
def test_nikolskii(s, p, q):
    res = nikolskii_check(s, p, q)
    assert res.holds and res.slack <= 1.0


def test_nikolskii_rejects_p_above_q():
    with pytest.raises(ValidationError):
        nikolskii_check((1,), 2.0, 1.0)
