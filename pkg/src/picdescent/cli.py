"""Command-line front end.

Exit status 0 means every reported check passed, 1 that some check failed
and 2 a usage or dataset error.  On failure the last line on stderr is
``FAILED: [...]``, a JSON list of the failing checks.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import verify
from .cech import GradedCechProblem, cech_graded, middle_vanishing
from .charts import DEFAULT_TRUNCATION, load_chart, run_ring
from .chartviz import load_style, render_svg
from .datasets import ENV_VAR, list_datasets, load_group, load_module
from .errors import PicDescentError
from .groupcoh import DEFAULT_BUDGET, bar_h, h1_crossed, lhs_assemble, modp_bar_dims
from .picard import load_picard, relative_pic, run_case
from .ssengine import Window
from .verify import Check


class UsageError(Exception):
    pass


def parse_window(text):
    """``"s_max,stem_min,stem_max"`` -> Window."""
    try:
        s_max, lo, hi = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"window {text!r} is not s_max,stem_min,stem_max") from None
    if s_max < 0 or lo > hi:
        raise UsageError(f"window {text!r} is empty")
    return Window(s_max, lo, hi)


def parse_range(text):
    """``"lo:hi"`` -> (lo, hi)."""
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"range {text!r} is not lo:hi") from None
    if lo > hi:
        raise UsageError(f"range {text!r} is empty")
    return lo, hi


def _ints(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{text!r} is not a comma separated list of integers") from None


def _report(checks, out=None):
    out = out or sys.stdout
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: claimed {c.claimed}; "
              f"computed {c.computed}", file=out)
    return [c.name for c in checks if not c.passed]


def _module_for(args):
    mod = load_module(args.module)
    if args.group and mod.group.name != args.group:
        raise UsageError(f"module {args.module} is over {mod.group.name}, not {args.group}")
    return mod


# ---------------------------------------------------------------------------
# commands; each returns (list of Check, text lines)


def cmd_group_cohomology(args):
    lines = []
    if args.method == "modp":
        dims = modp_bar_dims(load_group(args.group), args.p, args.s_max,
                             budget=args.budget or DEFAULT_BUDGET)
        lines += [f"dim H^{s}(G, F_{args.p}) = {d}" for s, d in enumerate(dims)]
        return [], lines
    mod = _module_for(args)
    if args.method == "lhs":
        res = lhs_assemble(mod, args.normal, args.s_max)
        groups = [res.assembled[s] for s in range(args.s_max + 1)]
    else:
        groups = bar_h(mod.group, mod, args.s_max, budget=args.budget or DEFAULT_BUDGET)
    lines += [f"H^{s} = {g if g is not None else 'undetermined'}" for s, g in enumerate(groups)]
    return [], lines


def cmd_h1(args):
    h = h1_crossed(_module_for(args))
    checks = []
    if args.expect is not None:
        checks.append(Check("H^1 order", str(args.expect), str(h.order()), h.order() == args.expect))
    return checks, [f"H^1 = {h}"]


def cmd_lhs(args):
    res = lhs_assemble(load_module(args.module), args.normal, args.s_max)
    lines = [f"normal subgroup of order {res.normal_order}, quotient of order "
             f"{res.quotient_order}"]
    for q in range(args.s_max + 1):
        lines.append(f"H^{q}(N, M) = {res.fibre[q]} ({res.decorations[q]})")
    for s in range(args.s_max + 1):
        g = res.assembled[s]
        lines.append(f"H^{s}(G, M) = {g if g is not None else 'extension undetermined'}")
    checks = [Check("LHS collapses", "True", str(res.collapse), res.collapse)]
    return checks, lines


def cmd_cosimp_verify(args):
    return verify.c11_appendix_c(args.t), []


def cmd_cech(args):
    p = GradedCechProblem(args.weights, args.window)
    res = cech_graded(p)
    lines = []
    for d in sorted(res):
        lines.append(f"degree {d}: " + ", ".join(f"H^{k} = {g}" for k, g in
                                                enumerate(res[d].groups)))
    n = len(args.weights)
    checks = [Check(f"H^k = 0 for 0 < k < {n - 1}", "True", str(middle_vanishing(res, n)),
                    middle_vanishing(res, n))]
    return checks, lines


def cmd_ss_run(args):
    ds = load_chart(args.case, args.truncation, args.window)
    pages, rules = run_ring(ds)
    by_r = {}
    for ru in rules:
        by_r[ru.r] = by_r.get(ru.r, 0) + 1
    lines = [f"chart {ds.name}: {len(rules)} rules " +
             ", ".join(f"d_{r}: {n}" for r, n in sorted(by_r.items()))]
    final = pages[-1]
    lines.append(f"E_{final.r} page, nonzero spots (s, t):")
    for (s, t) in sorted(final.bidegrees()):
        g = final.group(s, t)
        if not g.is_trivial():
            lines.append(f"  ({s}, {t}) stem {t - s}: {g}")
    return [], lines


def cmd_pic(args):
    run, v, c = run_case(args.case, args.truncation)
    inp = load_picard(args.case, args.truncation)
    lines = [f"case {args.case}"]
    if run is not None:
        lines.append(f"surviving orders on t = s: {v.survivors()}")
        lines.append(f"comparison: {len(run.rules)} rules used, {len(run.rejected)} rejected")
        for u in run.unstable:
            lines.append(f"unstable differential at {u.rules[0].source if u.rules else '?'}: "
                         f"kernel {u.kernel}, image rank {u.image_rank}")
    lines.append(v.describe())
    lines.append(c.message)
    if run is not None and v.free_rank == 0:
        rel = relative_pic(v, c)
        lines.append(f"relative Picard group: order {rel.order}"
                     + (f", {rel.group}" if rel.group is not None else ""))
    claimed = f"certified, lower bound {inp.periodicity}"
    checks = [Check(f"{args.case}: Pic certified", claimed, c.status,
                    c.status == "cyclic-certified")]
    return checks, lines


def cmd_chart(args):
    pages, rules = _chart_pages(args)
    wanted = [p for p in pages if args.page is None or p.r == args.page]
    if not wanted:
        raise UsageError(f"no page {args.page}; pages run from E_{pages[0].r} to E_{pages[-1].r}")
    window = args.window or pages[0].window
    svg = render_svg(wanted, rules, load_style(args.style), window, title=args.case)
    out = Path(args.out or f"{args.case}-E{args.page if args.page else 'all'}.svg")
    out.write_text(svg)
    return [], [f"wrote {out}"]


def _chart_pages(args):
    if not args.ring and args.case in list_datasets("picard"):
        run = run_case(args.case, args.truncation)[0]
        if run is not None:
            return run.pages, run.rules
    ds = load_chart(args.case, args.truncation)
    return run_ring(ds)


def cmd_verify_all(args):
    numbers = args.only or [n for n, *_ in verify.CRITERIA]
    checks = []
    results = []
    for n in sorted(numbers):
        res = verify.run_criterion(n)
        results.append(res)
        print(verify.format_result(res, verbose=args.verbose), flush=True)
        checks.append(Check(f"criterion {n}", "PASS", "PASS" if res.passed else
                            "FAIL: " + "; ".join(res.failures()), res.passed))
    if args.out:
        doc = [{"criterion": r.number, "title": r.title, "passed": r.passed,
                "limit_ms": r.limit_ms,
                "checks": [c.__dict__ for c in r.checks], "error": r.error} for r in results]
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return checks, []


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="picdescent",
                                description="Picard groups of ring spectra by descent. "
                                            f"Datasets are read from ${ENV_VAR} if set.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("group-cohomology", cmd_group_cohomology, "H^s(G, M) for s <= s-max")
    sp.add_argument("--group", required=True)
    sp.add_argument("--module")
    sp.add_argument("--method", choices=("bar", "lhs", "modp"), default="bar")
    sp.add_argument("--normal", default="sigma", help="normal cyclic subgroup for lhs")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--s-max", type=int, default=3)
    sp.add_argument("--budget", type=int)

    sp = add("h1", cmd_h1, "H^1 by crossed homomorphisms")
    sp.add_argument("--group")
    sp.add_argument("--module", required=True)
    sp.add_argument("--expect", type=int, help="expected order, turns the output into a check")

    sp = add("lhs", cmd_lhs, "LHS spectral sequence for a cyclic normal subgroup")
    sp.add_argument("--module", required=True)
    sp.add_argument("--normal", default="sigma")
    sp.add_argument("--s-max", type=int, default=8)

    sp = add("cosimp-verify", cmd_cosimp_verify, "symmetric-square checks for given t")
    sp.add_argument("--t", type=int, nargs="+", default=[2, 3])

    sp = add("cech", cmd_cech, "graded Cech cohomology of punctured affine space")
    sp.add_argument("--weights", type=_ints, default=(1, 1))
    sp.add_argument("--window", type=parse_range, default=(-6, 2), help="degrees lo:hi")

    sp = add("ss-run", cmd_ss_run, "run the ring spectral sequence of a chart dataset")
    sp.add_argument("--case", required=True)
    sp.add_argument("--window", type=parse_window, help="s_max,stem_min,stem_max")
    sp.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)

    sp = add("pic", cmd_pic, "full Picard pipeline for a case")
    sp.add_argument("--case", required=True)
    sp.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)

    sp = add("chart", cmd_chart, "draw pages of a chart as SVG")
    sp.add_argument("--case", required=True)
    sp.add_argument("--page", type=int)
    sp.add_argument("--ring", action="store_true", help="draw the ring chart, not the Picard chart")
    sp.add_argument("--window", type=parse_window)
    sp.add_argument("--truncation", type=int, default=DEFAULT_TRUNCATION)
    sp.add_argument("--style", default="default")
    sp.add_argument("--out")

    sp = add("verify-all", cmd_verify_all, "run the acceptance checks")
    sp.add_argument("--only", type=_ints, help="criterion numbers, comma separated")
    sp.add_argument("--verbose", "-v", action="store_true")
    sp.add_argument("--out", help="write a JSON report here")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return exc.code
    try:
        checks, lines = args.fn(args)
    except (UsageError, PicDescentError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    failed = _report(checks) if args.command != "verify-all" else \
        [c.name for c in checks if not c.passed]
    sys.stdout.flush()
    if failed:
        print("FAILED: " + json.dumps(failed), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
