"""Function call inlining.

Resolves each apply node's callee through the plumbing that carries
function values around -- context variables, gamma entries, and
pass-through theta loop variables -- and replaces the call with a copy
of the target body when the target is not (mutually) recursive and is
either called from exactly one site or small.  Context values of the
target re-enter the call site through `route_to_region`.

Recursive functions live inside a recursion environment node, which the
resolver treats as opaque, so they are never inlined.
"""

from ..rewrite import copy_nodes, route_to_region

SMALL = 16


def run(graph):
    sites = []
    for node in graph.all_nodes():
        if node.kind == "simple" and node.op.name == "apply":
            lam = _resolve(graph, node.inputs[0].origin)
            if lam is not None:
                sites.append((node, lam))
    callers = {}
    for _, lam in sites:
        callers[lam] = callers.get(lam, 0) + 1
    for node, lam in sites:
        if callers[lam] == 1 or _size(lam) <= SMALL:
            if _inlinable(lam) and not _encloses(lam, node):
                _inline(graph, node, lam)


def _resolve(graph, port):
    """Chase a function value back to the lambda that produced it."""
    while True:
        if port.node is not None:
            return port.node if port.node.kind == "lambda" else None
        owner = port.region.owner
        if owner is None:
            return None                      # an imported function
        if owner.kind == "gamma":
            port = owner.inputs[port.index + 1].origin
        elif owner.kind == "theta":
            res = owner.subregions[0].results[port.index + 1]
            if res.origin is not port:
                return None                  # rebound each iteration
            port = owner.inputs[port.index].origin
        elif port.index < owner.n_ctx:
            port = owner.inputs[port.index].origin
        else:
            return None                      # recursion or parameter binding


def _size(lam):
    count = 0
    stack = [lam.subregions[0]]
    while stack:
        region = stack.pop()
        for n in region.nodes:
            if n.kind == "simple":
                count += 1
            stack.extend(n.subregions)
    return count


def _inlinable(lam):
    if lam.region.owner is not None and lam.region.owner.kind == "phi":
        return False
    stack = [lam.subregions[0]]
    while stack:
        region = stack.pop()
        for n in region.nodes:
            if n.kind not in ("simple", "gamma", "theta"):
                return False
            stack.extend(n.subregions)
    return True


def _encloses(lam, node):
    region = node.region
    while region is not None:
        if region.owner is lam:
            return True
        region = None if region.owner is None else region.owner.region
    return False


def _inline(graph, site, lam):
    body = lam.subregions[0]
    portmap = {}
    for l in range(lam.n_ctx):
        portmap[body.args[l]] = route_to_region(
            graph, lam.inputs[l].origin, site.region)
    for arg, use in zip(body.args[lam.n_ctx:], site.inputs[1:]):
        portmap[arg] = use.origin
    copy_nodes(graph, graph.topological_order(body), site.region, portmap)
    for out, res in zip(site.outputs, body.results):
        graph.divert_users(out, portmap[res.origin])
    graph.remove_node(site)
