"""Push invariant nodes out of gammas and thetas.

A stateless simple node inside a theta whose inputs all come from
invariant loop variables (or from other nodes already pushed out) is
recomputed once in the enclosing region; its value re-enters the body
through a fresh pass-through loop variable.  The same applies to a
gamma alternative, with the value re-entering through a fresh entry
variable -- but only for operations that cannot trap, since hoisting
past the predicate makes them execute unconditionally.

Chains hoist in a single run: the walk is innermost-first and each body
is scanned in topological order, so a node freed up by an earlier hoist
is caught in the same scan.  The hoisted originals lose their users and
are left for dead node elimination.
"""


def run(graph):
    _process(graph, graph.root)


def _process(graph, region):
    for node in list(region.nodes):
        if node.kind in ("lambda", "delta", "phi"):
            _process(graph, node.subregions[0])
        elif node.kind == "theta":
            _process(graph, node.subregions[0])
            _hoist_theta(graph, node)
        elif node.kind == "gamma":
            for sub in node.subregions:
                _process(graph, sub)
            _hoist_gamma(graph, node)


def _hoist_theta(graph, node):
    body = node.subregions[0]
    outer = {}
    for l in range(len(node.inputs)):
        if body.results[l + 1].origin is body.args[l]:
            outer[body.args[l]] = node.inputs[l].origin
    for inner in graph.topological_order(body):
        if inner.kind != "simple" or inner.op.is_stateful:
            continue
        if not all(u.origin in outer for u in inner.inputs):
            continue
        moved = graph.add_simple(node.region, inner.op,
                                 [outer[u.origin] for u in inner.inputs])
        for old, new in zip(inner.outputs, moved.outputs):
            arg, _ = graph.theta_add_loopvar(node, new)
            graph.theta_set_result(node, len(node.inputs) - 1, arg)
            graph.divert_users(old, arg)
            outer[arg] = new


def _hoist_gamma(graph, node):
    for c, sub in enumerate(node.subregions):
        outer = {}
        for l, use in enumerate(node.inputs[1:]):
            outer[sub.args[l]] = use.origin
        for inner in graph.topological_order(sub):
            if inner.kind != "simple" or inner.op.is_stateful \
                    or inner.op.can_trap:
                continue
            if not all(u.origin in outer for u in inner.inputs):
                continue
            moved = graph.add_simple(node.region, inner.op,
                                     [outer[u.origin] for u in inner.inputs])
            for old, new in zip(inner.outputs, moved.outputs):
                args = graph.gamma_add_entry(node, new)
                graph.divert_users(old, args[c])
                outer[args[c]] = new
