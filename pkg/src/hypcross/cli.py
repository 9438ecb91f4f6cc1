"""Command-line interface.

Exit codes: 0 success, 2 invalid input or violated hypothesis, 3 a verification
bracket was exceeded (or a requested accuracy could not be certified).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from typing import Optional, Sequence

from hypcross.blocksum import BlockSum
from hypcross.cross import CrossSpec, enumerate_cross
from hypcross.errors import DomainError, NyquistError, ToleranceError, ValidationError
from hypcross.gridpath import PERIODIZATION_NOTE, project_sharp, read_grid, sharp_residual, write_grid
from hypcross.kernels import as_multi_index, eval_A_star
from hypcross.norms import QuadratureSpec, block_lp_norm_relerr, block_norm, lq_norm
from hypcross.rates import run_theorem1, run_theorem2, verify_lacunary_sum, verify_lemma_brackets
from hypcross.smoothness import analyze_smoothness

EXIT_OK, EXIT_INVALID, EXIT_BRACKET = 0, 2, 3


class BracketExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsing


def real(text: str) -> float:
    """Decimal float; the literal ``inf`` is accepted."""
    t = str(text).strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def real_list(text: str) -> tuple:
    return tuple(real(v) for v in str(text).split(",") if v.strip())


def int_list(text: str) -> tuple:
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Keys use flag spelling."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# output


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _check(value: float, limit: float, what: str) -> None:
    if value > limit:
        raise BracketExceeded(f"{what} {value:.6g} exceeds {limit:g}")


# ---------------------------------------------------------------------------
# commands


def cmd_cross_enum(args) -> None:
    gamma = args.gamma or (1.0,) * args.d
    if len(gamma) != args.d:
        raise ValidationError(f"gamma has {len(gamma)} entries, expected d = {args.d}")
    idx = enumerate_cross(CrossSpec(gamma, args.n))
    if args.format == "json":
        _emit(args, json.dumps([list(s) for s in idx]))
    else:
        _emit(args, _csv([f"s{j + 1}" for j in range(args.d)], idx))


def cmd_kernel_eval(args) -> None:
    s = as_multi_index(args.s)
    d = len(s)
    if len(args.x) % d:
        raise ValidationError(f"--x needs a multiple of d = {d} values")
    pts = [args.x[i : i + d] for i in range(0, len(args.x), d)]
    vals = [float(eval_A_star(s, p)) for p in pts]
    if args.format == "json":
        _emit(args, _json({"s": list(s), "points": [list(p) for p in pts], "values": vals}))
    else:
        _emit(args, _csv([f"x{j + 1}" for j in range(d)] + ["value"], [list(p) + [v] for p, v in zip(pts, vals)]))


def cmd_kernel_norm(args) -> None:
    s = as_multi_index(args.s)
    p = args.p
    if args.method == "quadrature" and not math.isinf(p):
        res = lq_norm(BlockSum.single(s), p, QuadratureSpec(tail_tol=args.tol, method="midpoint"))
        value, err = res.value, res.error
    else:
        value = block_norm(s, p)
        err = 0.0 if math.isinf(p) else block_lp_norm_relerr(s, p) * value
    out = {"s": list(s), "p": "inf" if math.isinf(p) else p, "value": value, "error": err, "method": args.method}
    if args.format == "json":
        _emit(args, _json(out))
    else:
        _emit(args, _csv(["value", "error"], [[value, err]]))
    if err > args.tol * value:
        raise ToleranceError(f"certified error {err:.3e} above tolerance", achieved=err)


def _block_grid(d: int, smin: int, smax: int) -> list:
    if smin < 0 or smax < smin:
        raise ValidationError(f"need 0 <= smin <= smax, got {smin}, {smax}")
    return [tuple(s) for s in itertools.product(range(smin, smax + 1), repeat=d)]


def cmd_verify_blocks(args) -> None:
    p = math.inf if args.which == "lemma1" else args.p
    if p is None:
        raise ValidationError("--p is required for lemma2")
    rep = verify_lemma_brackets(_block_grid(args.d, args.smin, args.smax), p)
    _emit(args, _json(rep.to_dict()) if args.format == "json" else rep.to_csv("s"))
    _check(rep.bracket, args.max_bracket, "bracket ratio")


def cmd_verify_sums(args) -> None:
    gamma = args.gamma or (1.0,) * args.d
    if len(gamma) != args.d:
        raise ValidationError(f"gamma has {len(gamma)} entries, expected d = {args.d}")
    alt = args.alt_gamma if args.which == "lemma-g" else None
    if args.which == "lemma-g" and alt is None:
        raise ValidationError("lemma-g needs --alt-gamma")
    limit = args.max_bracket
    if limit is None:
        limit = 1.6 if args.which == "lemma-v" else 2.0
    rep = verify_lacunary_sum(gamma, args.alpha, range(args.nmin, args.nmax + 1), alt)
    _emit(args, _json(rep.to_dict()) if args.format == "json" else rep.to_csv("n"))
    _check(rep.bracket, limit, "bracket ratio")


def cmd_rates(args) -> None:
    profile = analyze_smoothness(args.r)
    ns = range(args.nmin, args.nmax + 1)
    if args.which == "theorem1":
        rep = run_theorem1(profile, args.theta, ns, resolution=args.resolution, threads=args.threads,
                           diagnostics=args.diagnostics)
    else:
        if args.q is None:
            raise ValidationError("--q is required for theorem2")
        quad = QuadratureSpec(box_halfwidth=args.quad_L, points_per_wavelength=args.quad_res,
                              tail_tol=args.quad_tol, method=args.quad_method)
        rep = run_theorem2(profile, args.theta, args.q, ns, quad=quad, threads=args.threads,
                           diagnostics=args.diagnostics)
    _emit(args, rep.to_json() if args.format == "json" else rep.to_csv())
    _check(rep.ratio_spread, args.max_spread, "ratio spread")


def cmd_grid_decompose(args) -> None:
    g = read_grid(args.input)
    gamma = args.gamma or (1.0,) * g.d
    spec = CrossSpec(gamma, args.n)
    res = sharp_residual(g, spec)
    if args.projected:
        write_grid(project_sharp(g, spec), args.projected)
    out = {"d": g.d, "L": g.L, "N": g.N, "n": spec.n, "gamma": list(spec.gamma),
           "residual_l2": res.l2, "residual_sup": res.sup, "relative_l2": res.relative_l2,
           "note": PERIODIZATION_NOTE}
    if args.format == "json":
        _emit(args, _json(out))
    else:
        _emit(args, _csv(["residual_l2", "residual_sup", "relative_l2"], [[res.l2, res.sup, res.relative_l2]]))


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    p.add_argument("--config", default=None, help="key = value file; flags override it")
    p.add_argument("--threads", type=int, default=None, help="cap on parallel work units")


def build_parser() -> tuple:
    parser = argparse.ArgumentParser(prog="hypcross", description="Hyperbolic-cross block kernel experiments.")
    top = parser.add_subparsers(dest="group", required=True)
    leaves = []

    def leaf(sub, name, func, **kw):
        p = sub.add_parser(name, **kw)
        _common(p)
        p.set_defaults(func=func)
        leaves.append(p)
        return p

    g = top.add_parser("cross").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "enum", cmd_cross_enum, help="list the indices of a step hyperbolic cross")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", type=real_list, default=None)
    p.add_argument("--n", type=int, required=True)

    g = top.add_parser("kernel").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "eval", cmd_kernel_eval, help="evaluate a block kernel at points")
    p.add_argument("--s", type=int_list, required=True)
    p.add_argument("--x", type=real_list, required=True)
    p = leaf(g, "norm", cmd_kernel_norm, help="L_p norm of a block kernel")
    p.add_argument("--s", type=int_list, required=True)
    p.add_argument("--p", type=real, required=True)
    p.add_argument("--tol", type=real, default=1e-6, help="relative accuracy to certify")
    p.add_argument("--method", choices=("reference", "quadrature"), default="reference")

    g = top.add_parser("verify").add_subparsers(dest="cmd", required=True)
    for name in ("lemma1", "lemma2"):
        p = leaf(g, name, cmd_verify_blocks, help="block-norm bracket over a box of indices")
        p.set_defaults(which=name)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--smin", type=int, default=2)
        p.add_argument("--smax", type=int, required=True)
        p.add_argument("--p", type=real, default=None)
        p.add_argument("--max-bracket", type=real, default=1.01)
    for name in ("lemma-v", "lemma-g"):
        p = leaf(g, name, cmd_verify_sums, help="lacunary tail-sum bracket over n")
        p.set_defaults(which=name)
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--gamma", type=real_list, default=None)
        p.add_argument("--alt-gamma", type=real_list, default=None)
        p.add_argument("--alpha", type=real, default=1.0)
        p.add_argument("--nmin", type=int, required=True)
        p.add_argument("--nmax", type=int, required=True)
        p.add_argument("--max-bracket", type=real, default=None)

    g = top.add_parser("rates").add_subparsers(dest="cmd", required=True)
    for name in ("theorem1", "theorem2"):
        p = leaf(g, name, cmd_rates, help="truncation-error rate experiment")
        p.set_defaults(which=name)
        p.add_argument("--r", type=real_list, required=True)
        p.add_argument("--theta", type=real, required=True)
        p.add_argument("--nmin", type=int, required=True)
        p.add_argument("--nmax", type=int, required=True)
        p.add_argument("--max-spread", type=real, default=2.5)
        p.add_argument("--diagnostics", action="store_true", help="add sharp-projection grid residuals")
        if name == "theorem1":
            p.add_argument("--resolution", type=int, default=8)
        else:
            p.add_argument("--q", type=real, default=None)
            p.add_argument("--quad-L", type=real, default=8.0)
            p.add_argument("--quad-res", type=int, default=8)
            p.add_argument("--quad-tol", type=real, default=1e-6)
            p.add_argument("--quad-method", choices=("auto", "midpoint"), default="auto")

    g = top.add_parser("grid").add_subparsers(dest="cmd", required=True)
    p = leaf(g, "decompose", cmd_grid_decompose, help="sharp cross projection of a sampled grid")
    p.add_argument("--input", required=True)
    p.add_argument("--gamma", type=real_list, default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--projected", default=None, help="write the projected grid to this header path")
    return parser, leaves


def _convert(act, key, raw):
    if act.const is True and act.nargs == 0:
        return raw.lower() in ("1", "true", "yes", "on")
    value = act.type(raw) if act.type else raw
    if act.choices and value not in act.choices:
        raise ValidationError(f"config {key} = {raw!r} not in {list(act.choices)}")
    return value


def _apply_config(parser, leaves, argv) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    values = read_config(known.config)
    # config entries become defaults; explicit flags parsed afterwards win
    for leaf in leaves:
        for act in leaf._actions:
            if act.dest in values and act.dest not in ("config", "help"):
                leaf.set_defaults(**{act.dest: _convert(act, act.dest, values[act.dest])})
                act.required = False
    args = parser.parse_args(argv)
    leaf = next(p for p in leaves if p.get_default("func") is args.func
                and p.get_default("which") == getattr(args, "which", None))
    dests = {a.dest for a in leaf._actions}
    unknown = sorted(k for k in values if k not in dests or k in ("config", "help"))
    if unknown:
        raise ValidationError(f"unknown config keys for this command: {unknown}")
    return args


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser, leaves = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, leaves, argv)
        args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BracketExceeded as exc:
        print(f"hypcross: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except ToleranceError as exc:
        print(f"hypcross: {exc}", file=sys.stderr)
        return EXIT_BRACKET
    except (ValidationError, DomainError, NyquistError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"hypcross: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
