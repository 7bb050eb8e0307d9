"""Command line driver.

Exit codes: 0 success, 1 for parse or validation errors in the input,
2 when an equivalence check between the source program and the region
graph fails, 3 when an internal invariant breaks.
"""

import argparse
import random
import sys

from .parser import (ParseError, SourceError, parse_file, check_module,
                     print_module)
from .graph import GraphError
from .build import BuildError, MEMVAR, IOVAR, construct, _prepare_tree
from .destruct import destruct
from .rewrite import RewriteError
from .restructure import RestructureError
from .interp import DEFAULT_FUEL, eval_cfg, eval_rvsdg, run_to_outcome
from .passes import PassConfig, PassError, run_pipeline
from .passes.pipeline import format_stats, parse_passes
from .passes import dne
from . import render
from .types import F64


class EquivalenceError(Exception):
    pass


def _load(path):
    mod = parse_file(path)
    check_module(mod)
    return mod


def _make_graph(mod):
    g = construct(mod)
    bad = g.validate()
    if bad:
        raise GraphError("constructed graph is invalid: " + "; ".join(bad))
    return g


def _pass_config(ns):
    cfg = PassConfig(unroll_factor=ns.unroll_factor)
    if ns.passes is not None:
        cfg.passes = parse_passes(ns.passes.replace(",", " "))
    return cfg


def _parse_args_flag(text):
    if not text:
        return []
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        if "." in tok or "e" in tok.lower():
            try:
                vals.append(float(tok))
                continue
            except ValueError:
                pass
        vals.append(int(tok, 0))
    return vals


def _pick_fn(mod, name):
    exported = [n for n in mod.order
                if n in mod.functions and mod.functions[n].export]
    if name is not None:
        if name not in mod.functions:
            raise SourceError("no function @%s" % name)
        return name
    if len(exported) == 1:
        return exported[0]
    raise SourceError("--fn required; exports are: %s" % ", ".join(exported))


def _fmt_value(v):
    return repr(v) if isinstance(v, float) else str(v)


def _fmt_outcome(outcome, out):
    if outcome[0] == "trap":
        out.write("trap: %s\n" % outcome[1])
        return
    _, rets, trace = outcome
    out.write("ret=%s\n" % ",".join(_fmt_value(v) for v in rets))
    for ev in trace:
        out.write("trace: %s\n" % " ".join(str(x) for x in ev))


def _random_args(rng, params):
    vals = []
    for _, ty in params:
        if ty is F64:
            vals.append(round(rng.uniform(-100.0, 100.0), 3))
        elif ty.kind == "int":
            hi = min(2 ** (ty.width - 1), 2 ** 16)
            vals.append(rng.randrange(-hi, hi) if ty.width > 1
                        else rng.randrange(2))
        else:
            return None             # pointers/functions: nothing sensible
    return vals


# -- subcommands ----------------------------------------------------------

def cmd_check(ns, out):
    mod = _load(ns.file)
    out.write("ok: %d functions, %d globals, %d externals\n"
              % (len(mod.functions), len(mod.globals_), len(mod.externals)))


def cmd_construct(ns, out):
    g = _make_graph(_load(ns.file))
    out.write(render.dump(g))


def cmd_opt(ns, out):
    mod = _load(ns.file)
    g = _make_graph(mod)
    run_pipeline(g, _pass_config(ns))
    out.write(print_module(destruct(g)))


def cmd_destruct(ns, out):
    mod = _load(ns.file)
    g = _make_graph(mod)
    if ns.passes is not None:
        run_pipeline(g, _pass_config(ns))
    out.write(print_module(destruct(g)))


def cmd_stats(ns, out):
    mod = _load(ns.file)
    n_instrs = sum(len(b.phis) + len(b.instrs) + 1
                   for fn in mod.functions.values() for b in fn.blocks)
    g = _make_graph(mod)
    if ns.passes is not None:
        steps = run_pipeline(g, _pass_config(ns))
        out.write(format_stats(steps) + "\n")
    counts = {}
    total = 0
    for node in g.all_nodes():
        total += 1
        key = node.op.name if node.kind == "simple" else node.kind
        counts[key] = counts.get(key, 0) + 1
    demanded, kept = dne.mark(g)
    dead = sum(1 for node in g.all_nodes()
               if node.outputs and node not in kept
               and not any(o in demanded for o in node.outputs))
    out.write("instrs=%d\n" % n_instrs)
    out.write("nodes=%d\n" % total)
    out.write("dead=%d\n" % dead)
    for key in sorted(counts):
        out.write("op.%s=%d\n" % (key, counts[key]))


def cmd_dot(ns, out):
    mod = _load(ns.file)
    if ns.level == "cfg":
        out.write(render.dot_cfg(mod))
    elif ns.level == "tree":
        name = _pick_fn(mod, ns.fn)
        _, tree = _prepare_tree(mod.functions[name], {MEMVAR, IOVAR},
                                thread_io=True)
        out.write(render.dot_tree(tree, name))
    else:
        g = _make_graph(mod)
        if ns.passes is not None:
            run_pipeline(g, _pass_config(ns))
        out.write(render.dot_rvsdg(g))


def cmd_run(ns, out):
    mod = _load(ns.file)
    name = _pick_fn(mod, ns.fn)
    args = _parse_args_flag(ns.args)
    if ns.level != "rvsdg":
        ref = run_to_outcome(lambda: eval_cfg(mod, name, list(args),
                                              fuel=ns.fuel))
    if ns.level != "cfg":
        g = _make_graph(mod)
        if ns.passes is not None:
            run_pipeline(g, _pass_config(ns))
        got = run_to_outcome(lambda: eval_rvsdg(g, name, list(args),
                                                fuel=ns.fuel))
    if ns.level == "cfg":
        _fmt_outcome(ref, out)
    elif ns.level == "rvsdg":
        _fmt_outcome(got, out)
    else:
        if ref != got:
            _fmt_outcome(ref, sys.stderr)
            _fmt_outcome(got, sys.stderr)
            raise EquivalenceError("cfg and region graph disagree on @%s(%s)"
                                   % (name, ns.args))
        _fmt_outcome(ref, out)


def cmd_roundtrip(ns, out):
    mod = _load(ns.file)
    g = _make_graph(mod)
    if ns.passes is not None:
        run_pipeline(g, _pass_config(ns))
    back = destruct(g)
    check_module(back)
    rng = random.Random(ns.seed)
    names = ([_pick_fn(mod, ns.fn)] if ns.fn else
             [n for n in mod.order
              if n in mod.functions and mod.functions[n].export])
    for name in names:
        fn = mod.functions[name]
        checked = 0
        for _ in range(ns.samples):
            args = _random_args(rng, fn.params)
            if args is None:
                break
            ref = run_to_outcome(lambda: eval_cfg(mod, name, list(args),
                                                  fuel=ns.fuel))
            got = run_to_outcome(lambda: eval_rvsdg(g, name, list(args),
                                                    fuel=ns.fuel))
            rt = run_to_outcome(lambda: eval_cfg(back, name, list(args),
                                                 fuel=ns.fuel))
            if ref != got or ref != rt:
                raise EquivalenceError("@%s(%s): outcomes diverge"
                                       % (name, args))
            checked += 1
        out.write("@%s: %d samples ok\n" % (name, checked))


# -- argument parsing -----------------------------------------------------

def _add_common(p, passes=False, runnable=False):
    p.add_argument("file")
    if passes:
        p.add_argument("--passes", default=None,
                       help="pass names, comma or space separated")
        p.add_argument("--unroll-factor", type=int, default=4)
    if runnable:
        p.add_argument("--fn", default=None)
        p.add_argument("--fuel", type=int, default=DEFAULT_FUEL)


def build_parser():
    ap = argparse.ArgumentParser(prog="regionir")
    sub = ap.add_subparsers(dest="cmd", required=True)

    _add_common(sub.add_parser("check", help="parse and verify a module"))
    _add_common(sub.add_parser("construct",
                               help="build the region graph and dump it"))
    p = sub.add_parser("opt", help="optimize and print the result")
    _add_common(p, passes=True)
    p = sub.add_parser("destruct",
                       help="rebuild source form from the region graph")
    _add_common(p, passes=True)
    p = sub.add_parser("stats", help="operation counts and pass statistics")
    _add_common(p, passes=True)
    p = sub.add_parser("dot", help="emit graphviz")
    _add_common(p, passes=True)
    p.add_argument("--fn", default=None)
    p.add_argument("--level", choices=("rvsdg", "cfg", "tree"),
                   default="rvsdg")
    p = sub.add_parser("run", help="evaluate a function")
    _add_common(p, passes=True, runnable=True)
    p.add_argument("--args", default="")
    p.add_argument("--level", choices=("rvsdg", "cfg", "both"),
                   default="both")
    p = sub.add_parser("roundtrip",
                       help="check source and graph agree on random inputs")
    _add_common(p, passes=True, runnable=True)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return ap


COMMANDS = {
    "check": cmd_check,
    "construct": cmd_construct,
    "opt": cmd_opt,
    "destruct": cmd_destruct,
    "stats": cmd_stats,
    "dot": cmd_dot,
    "run": cmd_run,
    "roundtrip": cmd_roundtrip,
}


def main(argv=None, out=None):
    ns = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        COMMANDS[ns.cmd](ns, out)
    except ParseError as e:
        sys.stderr.write("parse error: %s\n" % e)
        return 1
    except (SourceError, BuildError, OSError) as e:
        sys.stderr.write("error: %s\n" % e)
        return 1
    except EquivalenceError as e:
        sys.stderr.write("equivalence failure: %s\n" % e)
        return 2
    except (GraphError, PassError, RewriteError, RestructureError,
            AssertionError) as e:
        sys.stderr.write("internal error: %s\n" % e)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
