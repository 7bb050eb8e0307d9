"""Pull nodes into the gamma alternative that consumes them.

A stateless, non-trapping simple node whose every user feeds entry
variables of a single gamma, where those entry variables are only read
in one alternative, can be recomputed inside that alternative instead;
the computation then runs only when the branch is actually taken.  The
node's inputs enter the gamma through fresh entry variables, the
original and the now-unread entries die and are swept later.
"""


def run(graph):
    for node in list(graph.all_nodes()):
        if node.region is None or node.kind != "simple":
            continue
        if node.op.is_stateful or node.op.can_trap:
            continue
        _try_pull(graph, node)


def _try_pull(graph, node):
    target = None
    entries = []                 # (entry index, node output index)
    for i, out in enumerate(node.outputs):
        if not out.users:
            return
        for use in out.users:
            g = use.node
            if g is None or g.kind != "gamma" or use.index == 0:
                return
            if target is None:
                target = g
            elif g is not target:
                return
            entries.append((use.index - 1, i))
    if target is None:
        return

    sub_index = None
    for l, _ in entries:
        args = [sub.args[l] for sub in target.subregions]
        used = [c for c, a in enumerate(args) if a.users]
        if len(used) != 1:
            return
        if sub_index is None:
            sub_index = used[0]
        elif used[0] != sub_index:
            return

    sub = target.subregions[sub_index]
    inner_inputs = []
    for use in node.inputs:
        args = graph.gamma_add_entry(target, use.origin)
        inner_inputs.append(args[sub_index])
    moved = graph.add_simple(sub, node.op, inner_inputs)
    for l, i in entries:
        graph.divert_users(sub.args[l], moved.outputs[i])
