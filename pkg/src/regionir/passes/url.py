"""Loop unrolling.

Innermost thetas (no theta anywhere below them) get their body
replicated `factor` times.  Replica j+1 sits inside a gamma guarded by
replica j's continuation predicate, so each replica only runs when the
loop would actually have reached that iteration; the untaken side of
the guard passes the current values through and reports "stop".  The
theta itself stays in place and its predicate becomes the innermost
replica's, so the iteration count is preserved exactly.  A factor of
one is the identity.
"""

from ..types import ctl
from ..ops import const
from ..rewrite import copy_nodes


def run(graph, factor=4):
    if factor < 1:
        raise ValueError("unroll factor must be positive, got %d" % factor)
    if factor == 1:
        return
    for node in list(graph.all_nodes()):
        if node.kind == "theta" and _innermost(node):
            _unroll(graph, node, factor)


def _innermost(node):
    stack = [node.subregions[0]]
    while stack:
        region = stack.pop()
        for n in region.nodes:
            if n.kind == "theta":
                return False
            stack.extend(n.subregions)
    return True


def _unroll(graph, node, factor):
    body = node.subregions[0]
    nodes = graph.topological_order(body)
    origins = [r.origin for r in body.results]
    n = len(node.inputs)

    vals = {l: origins[l + 1] for l in range(n)}
    pred = origins[0]
    vals, pred = _expand(graph, body, body, nodes, origins, vals, pred,
                         1, factor)
    graph.theta_set_predicate(node, pred)
    for l in range(n):
        graph.theta_set_result(node, l, vals[l])


def _expand(graph, body, region, nodes, origins, vals, pred, depth, factor):
    """Guard one more replica of the body behind `pred` inside `region`;
    returns the values and continuation predicate after it."""
    if depth == factor:
        return vals, pred
    gamma = graph.begin_gamma(region, pred, 2)
    stop, go = gamma.subregions
    entry = {}
    for l in sorted(vals):
        args = graph.gamma_add_entry(gamma, vals[l])
        entry[l] = args
    zero = graph.add_simple(stop, const(0, ctl(2)), []).outputs[0]

    portmap = {}
    for l, args in entry.items():
        portmap[body.args[l]] = args[1]
    copy_nodes(graph, nodes, go, portmap)
    nvals = {l: portmap[origins[l + 1]] for l in vals}
    npred = portmap[origins[0]]
    nvals, npred = _expand(graph, body, go, nodes, origins, nvals, npred,
                           depth + 1, factor)

    outs = {}
    for l, args in entry.items():
        outs[l] = graph.gamma_add_exit(gamma, [args[0], nvals[l]])
    pred_out = graph.gamma_add_exit(gamma, [zero, npred])
    return outs, pred_out
