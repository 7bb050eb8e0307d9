"""Pass manager.

Runs a sequence of named passes over the graph, validating the
structural invariants after each one.  The default order interleaves
the cleanup passes (INV, DNE) between the structural rewrites, since
almost every rewrite leaves pass-through plumbing behind.
"""

from dataclasses import dataclass, field

from . import cne, dne, iln, inv, ivt, pll, psh, red, url

DEFAULT_ORDER = ("ILN INV RED DNE IVT INV DNE PSH INV DNE "
                 "URL INV RED CNE DNE PLL INV DNE")

PASSES = {
    "DNE": dne.run,
    "CNE": cne.run,
    "ILN": iln.run,
    "INV": inv.run,
    "PSH": psh.run,
    "PLL": pll.run,
    "RED": red.run,
    "URL": url.run,
    "IVT": ivt.run,
}


class PassError(Exception):
    pass


@dataclass
class PassConfig:
    passes: list = field(default_factory=lambda: DEFAULT_ORDER.split())
    unroll_factor: int = 4


def parse_passes(text):
    names = text.split()
    for name in names:
        if name.upper() not in PASSES:
            raise PassError("unknown pass %r" % name)
    return [n.upper() for n in names]


def node_count(graph):
    return sum(1 for _ in graph.all_nodes())


def run_pipeline(graph, config=None):
    """Run the configured passes; returns per-step statistics as a list
    of (pass name, nodes before, nodes after)."""
    config = config or PassConfig()
    steps = []
    for name in config.passes:
        fn = PASSES[name]
        before = node_count(graph)
        if name == "URL":
            fn(graph, factor=config.unroll_factor)
        else:
            fn(graph)
        bad = graph.validate()
        if bad:
            raise PassError("%s broke the graph: %s" % (name, "; ".join(bad)))
        steps.append((name, before, node_count(graph)))
    return steps


def format_stats(steps):
    lines = []
    for i, (name, before, after) in enumerate(steps):
        lines.append("step%02d.pass=%s" % (i, name))
        lines.append("step%02d.nodes_before=%d" % (i, before))
        lines.append("step%02d.nodes_after=%d" % (i, after))
    return "\n".join(lines)
