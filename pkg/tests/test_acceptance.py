"""One test per acceptance criterion, each at its stated tolerance."""

import functools
import itertools
import math

import numpy as np
import pytest

from hypcross.blocksum import BlockSum, project_cross
from hypcross.cli import main
from hypcross.cross import CrossSpec, enumerate_layer, lacunary_tail_sum
from hypcross.errors import NyquistError
from hypcross.extremal import ExtremalSpec, make_extremal
from hypcross.gridpath import littlewood_paley_check, reconstruct, sample
from hypcross.kernels import factor_multiplier, multiplier_k
from hypcross.norms import (
    QuadratureSpec,
    block_lp_norm,
    block_lp_norm_relerr,
    l2_norm_exact,
    lq_norm,
    nikolskii_check,
    sup_norm,
)
from hypcross.rates import run_theorem1, run_theorem2, sharp_projection_diagnostic, theorem2_kind
from hypcross.smoothness import analyze_smoothness

pytestmark = pytest.mark.acceptance

P22 = analyze_smoothness((2.0, 2.0))
P15 = analyze_smoothness((1.5,))


def spread(values):
    return max(values) / min(values)


@functools.lru_cache(maxsize=None)
def theorem1(theta):
    return run_theorem1(P22, theta, range(4, 11))


@functools.lru_cache(maxsize=None)
def theorem2(profile, theta, q, nmin, nmax):
    return run_theorem2(profile, theta, q, range(nmin, nmax + 1))


def test_criterion_01_multiplier_partition(criterion):
    lam = np.random.default_rng(1).uniform(-64, 64, 10_000)
    total = sum(factor_multiplier(m, lam) for m in range(9))
    worst = float(np.max(np.abs(total - multiplier_k(8, lam))))
    criterion(1, worst <= 1e-12, f"max telescoping defect {worst:.2e} (tol 1e-12)")


def test_criterion_02_block_lp_constancy(criterion):
    rows = []
    ok = True
    for p in (1.0, 2.0):
        vals = [block_lp_norm(s, p) * 2.0 ** (-sum(s) * (1 - 1 / p))
                for s in itertools.product(range(1, 9), repeat=2)]
        rel = spread(vals) - 1
        inner = [block_lp_norm(s, p) * 2.0 ** (-sum(s) * (1 - 1 / p))
                 for s in itertools.product(range(2, 9), repeat=2)]
        rows.append(f"p={p:g}: spread-1 {rel:.3e} (s_j>=2 only: {spread(inner) - 1:.1e})")
        ok &= rel <= 0.01

    rng = np.random.default_rng(2)
    worst = 0.0
    quad_ok = True
    for _ in range(10):
        s = tuple(int(v) for v in rng.integers(0, 9, size=2))
        p = float(rng.choice([1.0, 2.0, 3.0]))
        spec = QuadratureSpec(tail_tol=1e-4, points_per_wavelength=32, method="midpoint")
        res = lq_norm(BlockSum.single(s), p, spec)
        ref = block_lp_norm(s, p)
        budget = res.error + ref * block_lp_norm_relerr(s, p)
        worst = max(worst, abs(res.value - ref) / budget)
        quad_ok &= abs(res.value - ref) <= budget
    rows.append(f"quadrature vs reference: max |diff|/error budget {worst:.3f}")
    criterion(2, ok and quad_ok, "; ".join(rows))


def test_criterion_03_exact_l2(criterion):
    worst = 0.0
    for s in itertools.product(range(2, 9), repeat=2):
        exact = math.prod(2.0 ** (m - 1) for m in s)
        for got in (block_lp_norm(s, 2.0) ** 2, l2_norm_exact(BlockSum.single(s)) ** 2):
            worst = max(worst, abs(got / exact - 1))
    b1 = l2_norm_exact(BlockSum.single((1,))) ** 2
    b0 = l2_norm_exact(BlockSum.single((0,))) ** 2
    worst_b = max(abs(b1 / (4 / 3) - 1), abs(b0 / (2 / 3) - 1),
                  abs(block_lp_norm((1,), 2.0) ** 2 / (4 / 3) - 1), abs(block_lp_norm((0,), 2.0) ** 2 / (2 / 3) - 1))
    ok = worst <= 1e-6 and worst_b <= 1e-6
    criterion(3, ok, f"max rel error s_j>=2 {worst:.1e}; boundary 4/3, 2/3 rel error {worst_b:.1e}")


def test_criterion_04_sup_norm_brackets(criterion):
    vals = []
    for d in (1, 2):
        for s in itertools.product(range(1, 9), repeat=d):
            vals.append(sup_norm(BlockSum.single(s)) * 2.0 ** (-sum(s)))
    single_spread = spread(vals)
    layer = []
    for n in range(4, 11):
        f = BlockSum.from_terms(2, [(s, 1.0) for s in enumerate_layer(2, n + 1)])
        layer.append(sup_norm(f) / (2.0**n * n))
    layer_spread = spread(layer)
    ok = single_spread <= 1.05 and layer_spread <= 2.5
    criterion(4, ok, f"single-block spread {single_spread:.4f} (tol 1.05); layer bracket {layer_spread:.4f} (tol 2.5)")


def test_criterion_05_lacunary_sums(criterion):
    worst = 0.0
    for n in range(3, 13):
        got = lacunary_tail_sum((1, 1), (1, 1), 1.0, n)
        brute = math.fsum(2.0 ** -(a + b) for a in range(200) for b in range(200) if a + b >= n)
        worst = max(worst, abs(got - (n + 2) * 2.0 ** (1 - n)), abs(brute - (n + 2) * 2.0 ** (1 - n)))
    ratios = [lacunary_tail_sum((1, 2), (1, 1.5), 1.0, n) / 2.0**-n for n in range(5, 13)]
    ok = worst <= 1e-10 and spread(ratios) <= 2.0
    criterion(5, ok, f"closed-form max abs error {worst:.1e} (tol 1e-10); weighted bracket {spread(ratios):.4f} (tol 2)")


def _random_blocksum_1d(seed):
    rng = np.random.default_rng(seed)
    return BlockSum.from_terms(1, [((s,), float(rng.uniform(-1, 1))) for s in range(6)])


def test_criterion_06_grid_reconstruction(criterion):
    f = _random_blocksum_1d(6)
    try:
        g = sample(f, 64.0, 4096)
    except NyquistError as exc:
        criterion(6, False, f"sampling at L=64, N=4096 violates the band limit: {exc}")
    err = np.max(np.abs(g.values - reconstruct(g, 6).values)) / np.max(np.abs(g.values))
    criterion(6, err <= 1e-3, f"relative sup reconstruction error {err:.2e} (tol 1e-3)")


def test_grid_reconstruction_at_required_resolution():
    f = _random_blocksum_1d(6)
    g = sample(f, 64.0, 8192)
    err = np.max(np.abs(g.values - reconstruct(g, 6).values)) / np.max(np.abs(g.values))
    print(f"companion to criterion 6 at N=8192: relative sup error {err:.2e}")
    assert err <= 1e-3


def test_criterion_07_littlewood_paley(criterion):
    rng = np.random.default_rng(7)
    ratios = []
    for k in range(5):
        d = 1 + k % 2
        terms = {tuple(int(v) for v in rng.integers(0, 4, size=d)): float(rng.uniform(-1, 1)) for _ in range(4)}
        f = BlockSum.from_terms(d, terms)
        g = sample(f, 8.0, 256)
        ratios.append(littlewood_paley_check(g))
    worst = max(abs(r - 1) for r in ratios)
    criterion(7, worst <= 1e-8, f"max |ratio - 1| {worst:.1e} over 5 grids (tol 1e-8)")


def test_criterion_08_nikolskii(criterion):
    slacks = []
    holds = True
    for d in (1, 2):
        for s in itertools.product(range(7), repeat=d):
            for p, q in ((1.0, 2.0), (1.0, math.inf), (2.0, math.inf)):
                res = nikolskii_check(s, p, q)
                holds &= res.holds
                slacks.append(res.slack)
    criterion(8, holds, f"{len(slacks)} cases, slack ratio in [{min(slacks):.4f}, {max(slacks):.4f}] (need <= 1)")


def test_criterion_09_theorem1(criterion):
    r1, rinf = theorem1(1.0), theorem1(math.inf)
    ok = (r1.ratio_spread <= 1.5 and rinf.ratio_spread <= 2.5
          and abs(r1.fitted_slope + 1) <= 0.15 and abs(rinf.fitted_slope + 1) <= 0.15)
    criterion(9, ok, f"theta=1 spread {r1.ratio_spread:.4f} slope {r1.fitted_slope:.4f}; "
                     f"theta=inf spread {rinf.ratio_spread:.4f} slope {rinf.fitted_slope:.4f}")


def test_criterion_10_theorem2(criterion):
    a = theorem2(P15, 1.0, 2.0, 4, 12)
    steps = a.step_ratios()
    worst_step = max(abs(x / 0.5 - 1) for x in steps)
    b = theorem2(P22, math.inf, 2.0, 4, 9)
    c = theorem2(P22, 4.0, 2.0, 4, 9)
    ok = worst_step <= 0.02 and b.ratio_spread <= 2.5 and c.ratio_spread <= 2.5
    criterion(10, ok, f"(a) max step deviation {worst_step:.1e}; (b) spread {b.ratio_spread:.4f}; "
                      f"(c) spread {c.ratio_spread:.4f}")


def test_criterion_11_symbolic_projection(criterion):
    runs = [(P22, 1.0, "layer_theta", range(4, 11)), (P22, math.inf, "layer_sup", range(4, 11)),
            (P15, 1.0, theorem2_kind(1.0, 2.0), range(4, 13)),
            (P22, math.inf, theorem2_kind(math.inf, 2.0), range(4, 10)),
            (P22, 4.0, theorem2_kind(4.0, 2.0), range(4, 10))]
    empty = True
    diag = []
    for prof, theta, kind, ns in runs:
        for n in ns:
            f = make_extremal(ExtremalSpec(prof, theta, n, kind))
            cross = CrossSpec((1.0,) * prof.d, n)
            empty &= len(project_cross(f, cross)) == 0
            if prof.d == 1 and n in (4, 8):
                diag.append(sharp_projection_diagnostic(f, cross))
    rel = ", ".join(f"n={d['n']}: {d['relative_l2']:.3f}" for d in diag)
    criterion(11, empty, f"all symbolic projections empty; sharp grid residual (relative L2, reported only) {rel}")


def test_criterion_12_determinism(tmp_path, criterion):
    commands = [
        ["rates", "theorem1", "--r", "2,2", "--theta", "inf", "--nmin", "4", "--nmax", "10"],
        ["rates", "theorem2", "--r", "1.5", "--theta", "1", "--q", "2", "--nmin", "4", "--nmax", "12"],
        ["rates", "theorem2", "--r", "2,2", "--theta", "4", "--q", "2", "--nmin", "4", "--nmax", "9"],
        ["verify", "lemma-v", "--d", "2", "--nmin", "3", "--nmax", "12"],
        ["verify", "lemma2", "--d", "2", "--smin", "2", "--smax", "8", "--p", "1"],
    ]
    same = True
    for k, cmd in enumerate(commands):
        outs = []
        for rep in range(2):
            path = tmp_path / f"run{k}_{rep}.csv"
            assert main(cmd + ["--output", str(path)]) == 0
            outs.append(path.read_bytes())
        same &= outs[0] == outs[1]
    criterion(12, same, f"{len(commands)} CSV outputs byte-identical across repeated runs")
