"""Invariant value diversion.

A theta loop variable whose body result is its own argument never
changes, so users of the theta output can read the input directly.
Likewise a gamma exit variable that routes the same entry variable's
argument out of every alternative just reproduces the entry's input.
Both diversions can expose one another, so the pass iterates to a
fixpoint.
"""


def run(graph):
    changed = True
    while changed:
        changed = False
        for node in list(graph.all_nodes()):
            if node.kind == "theta":
                changed |= _divert_theta(graph, node)
            elif node.kind == "gamma":
                changed |= _divert_gamma(graph, node)


def _divert_theta(graph, node):
    body = node.subregions[0]
    changed = False
    for l in range(len(node.inputs)):
        if body.results[l + 1].origin is body.args[l] \
                and node.outputs[l].users:
            graph.divert_users(node.outputs[l], node.inputs[l].origin)
            changed = True
    return changed


def _divert_gamma(graph, node):
    changed = False
    for l, out in enumerate(node.outputs):
        if not out.users:
            continue
        entry = _common_entry(node, l)
        if entry is not None:
            graph.divert_users(out, node.inputs[entry + 1].origin)
            changed = True
    return changed


def _common_entry(node, l):
    """The entry variable index every alternative routes to exit l,
    or None."""
    entry = None
    for sub in node.subregions:
        origin = sub.results[l].origin
        if origin.node is not None or origin.region is not sub:
            return None
        if entry is None:
            entry = origin.index
        elif origin.index != entry:
            return None
    return entry
