"""Local reductions: constant folding and algebraic simplification.

Folds arithmetic, comparisons, negation, and match tables whose inputs
are constants, applies the usual identities (x+0, x*1, x*0, x-x and
friends), and inlines the selected alternative of a gamma whose
predicate is a constant.  The whole graph is rescanned for a bounded
number of rounds because one reduction routinely enables the next.
"""

from ..types import ctl
from ..ops import const
from ..rewrite import copy_nodes
from ..interp import Trap, eval_binop, wrap_int, coerce_literal

ROUNDS = 4


def run(graph):
    for _ in range(ROUNDS):
        if not _round(graph):
            break


def _round(graph):
    changed = False
    for node in list(graph.all_nodes()):
        if node.region is None:
            continue                      # removed by an earlier reduction
        if node.kind == "simple":
            changed |= _reduce_simple(graph, node)
        elif node.kind == "gamma":
            changed |= _reduce_gamma(graph, node)
    return changed


def _const_of(port):
    if port is None:
        return None
    n = port.node
    if n is not None and n.kind == "simple" and n.op.name == "const":
        return coerce_literal(n.op.value, n.op.ty)
    return None


def _emit_const(graph, region, value, ty):
    return graph.add_simple(region, const(value, ty), []).outputs[0]


def _replace_with_const(graph, node, value, ty):
    port = _emit_const(graph, node.region, value, ty)
    graph.divert_users(node.outputs[0], port)
    return True


def _replace_with(graph, node, origin):
    graph.divert_users(node.outputs[0], origin)
    return True


def _reduce_simple(graph, node):
    op = node.op
    n = op.name
    if not node.outputs or not node.outputs[0].users:
        return False
    vals = [_const_of(u.origin) for u in node.inputs]

    if n == "neg" and vals[0] is not None:
        v = -vals[0] if op.ty.kind == "f64" else wrap_int(-vals[0], op.ty.width)
        return _replace_with_const(graph, node, v, op.ty)

    if n == "match" and vals[0] is not None:
        for key, case in op.table:
            if vals[0] == key:
                break
        else:
            case = op.default
        return _replace_with_const(graph, node, case, ctl(op.k))

    if n not in ("add", "sub", "mul", "div", "rem", "shl", "shr",
                 "and", "or", "xor", "eq", "ne", "lt", "le", "gt", "ge"):
        return False

    a, b = vals
    if a is not None and b is not None:
        try:
            v = eval_binop(n, op.ty, a, b)
        except Trap:
            return False
        out_ty = node.outputs[0].ty
        return _replace_with_const(graph, node, v, out_ty)

    if op.ty.kind != "int":
        return False
    x0, x1 = node.inputs[0].origin, node.inputs[1].origin
    if n == "add":
        if b == 0:
            return _replace_with(graph, node, x0)
        if a == 0:
            return _replace_with(graph, node, x1)
    elif n == "sub":
        if b == 0:
            return _replace_with(graph, node, x0)
        if x0 is x1:
            return _replace_with_const(graph, node, 0, op.ty)
    elif n == "mul":
        if b == 1:
            return _replace_with(graph, node, x0)
        if a == 1:
            return _replace_with(graph, node, x1)
        if a == 0 or b == 0:
            return _replace_with_const(graph, node, 0, op.ty)
    elif n == "xor":
        if x0 is x1:
            return _replace_with_const(graph, node, 0, op.ty)
    elif n in ("and", "or"):
        if x0 is x1:
            return _replace_with(graph, node, x0)
    elif n == "div":
        if b == 1:
            return _replace_with(graph, node, x0)
    elif n in ("shl", "shr"):
        if b == 0:
            return _replace_with(graph, node, x0)
    return False


def _reduce_gamma(graph, node):
    """Inline the chosen alternative of a constant-predicate gamma."""
    pred = _const_of(node.inputs[0].origin)
    if pred is None:
        return False
    if not 0 <= pred < len(node.subregions):
        return False                     # out-of-range predicate traps
    sub = node.subregions[pred]
    portmap = {}
    for l, use in enumerate(node.inputs[1:]):
        portmap[sub.args[l]] = use.origin
    copy_nodes(graph, graph.topological_order(sub), node.region, portmap)
    for l, out in enumerate(node.outputs):
        graph.divert_users(out, portmap[sub.results[l].origin])
    graph.remove_node(node)
    return True
