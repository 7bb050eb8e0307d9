"""Unit tests for the region graph data model.

Each test names its oracle: [TRIVIAL] asserts definitional behavior,
[DERIVED] values were computed by hand from the documented semantics.
"""

import pytest

from regionir.graph import Graph, GraphError
from regionir import ops
from regionir.types import I1, I32, I64, ctl


def _simple_fn():
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    body = lam.subregions[0]
    a = g.lambda_add_param(lam, I64)
    b = g.lambda_add_param(lam, I64)
    n = g.add_simple(body, ops.binop("add", I64), [a, b])
    g.lambda_finish(lam, [n.outputs[0]])
    g.omega_add_export("f", lam.outputs[0])
    return g, lam, n


def test_validate_accepts_well_formed_graph():
    """[TRIVIAL] A hand-built add function has no violations."""
    g, lam, _ = _simple_fn()
    assert g.validate() == []
    assert lam.outputs[0].ty.kind == "fn"


def test_validate_reports_signature_mismatch():
    """[TRIVIAL] Feeding i64 values to an i32 operation is flagged."""
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    a = g.lambda_add_param(lam, I64)
    g.add_simple(lam.subregions[0], ops.binop("add", I32), [a, a])
    g.lambda_finish(lam, [])
    assert any("signature" in msg for msg in g.validate())


def test_cross_region_edge_rejected():
    """[TRIVIAL] connect refuses an origin from a different region."""
    g, lam, _ = _simple_fn()
    other = g.begin_lambda(g.root, "h")
    with pytest.raises(GraphError):
        g.add_simple(other.subregions[0], ops.binop("add", I64),
                     [lam.subregions[0].args[0]] * 2)


def test_divert_users_moves_every_edge():
    """[DERIVED] After diverting, the old port has no users and every
    former user points at the new port."""
    g, lam, n = _simple_fn()
    body = lam.subregions[0]
    c = g.add_simple(body, ops.const(1, I64), [])
    g.divert_users(n.outputs[0], c.outputs[0])
    assert n.outputs[0].users == []
    assert body.results[0].origin is c.outputs[0]
    assert g.validate() == []


def test_remove_node_detaches_it():
    """[TRIVIAL] A removed node leaves the region and its inputs are
    disconnected."""
    g, lam, n = _simple_fn()
    body = lam.subregions[0]
    c = g.add_simple(body, ops.const(0, I64), [])
    g.divert_users(n.outputs[0], c.outputs[0])
    g.remove_node(n)
    assert n.region is None
    assert n not in body.nodes
    assert g.validate() == []


def test_topological_order_respects_dependencies():
    """[DERIVED] Producers come before consumers; ties break by id."""
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    body = lam.subregions[0]
    a = g.lambda_add_param(lam, I64)
    x = g.add_simple(body, ops.const(3, I64), [])
    y = g.add_simple(body, ops.binop("mul", I64), [a, x.outputs[0]])
    z = g.add_simple(body, ops.binop("add", I64), [y.outputs[0], a])
    g.lambda_finish(lam, [z.outputs[0]])
    order = [n.id for n in g.topological_order(body)]
    assert order.index(x.id) < order.index(y.id) < order.index(z.id)


def test_gamma_shape():
    """[TRIVIAL] A two-way gamma has a ctl(2) predicate input, matching
    entry variables in both subregions, and typed exits."""
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    body = lam.subregions[0]
    a = g.lambda_add_param(lam, I1)
    v = g.lambda_add_param(lam, I64)
    m = g.add_simple(body, ops.identity_match(I1, 2), [a])
    gam = g.begin_gamma(body, m.outputs[0], 2)
    ev = g.gamma_add_entry(gam, v)
    one = g.add_simple(gam.subregions[1], ops.const(1, I64), [])
    add = g.add_simple(gam.subregions[1], ops.binop("add", I64),
                       [ev[1], one.outputs[0]])
    out = g.gamma_add_exit(gam, [ev[0], add.outputs[0]])
    g.lambda_finish(lam, [out])
    assert gam.inputs[0].origin.ty == ctl(2)
    assert len(gam.subregions) == 2
    assert g.validate() == []


def test_theta_shape():
    """[TRIVIAL] A theta's body result 0 is its ctl(2) predicate and
    loop variables line up input/argument/result/output."""
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    body = lam.subregions[0]
    v = g.lambda_add_param(lam, I64)
    th = g.begin_theta(body)
    lv, _ = g.theta_add_loopvar(th, v)
    inner = th.subregions[0]
    one = g.add_simple(inner, ops.const(1, I64), [])
    dec = g.add_simple(inner, ops.binop("sub", I64), [lv, one.outputs[0]])
    zero = g.add_simple(inner, ops.const(0, I64), [])
    c = g.add_simple(inner, ops.cmpop("ne", I64),
                     [dec.outputs[0], zero.outputs[0]])
    m = g.add_simple(inner, ops.identity_match(I1, 2), [c.outputs[0]])
    g.theta_set_predicate(th, m.outputs[0])
    g.theta_set_result(th, 0, dec.outputs[0])
    g.lambda_finish(lam, [th.outputs[0]])
    assert inner.results[0].ty == ctl(2)
    assert len(th.inputs) == len(th.outputs) == len(inner.args)
    assert g.validate() == []


def test_validate_catches_dangling_result():
    """[TRIVIAL] A region result with no origin is a violation."""
    g = Graph()
    lam = g.begin_lambda(g.root, "f")
    g.lambda_add_param(lam, I64)
    g.lambda_finish(lam, [lam.subregions[0].args[0]])
    g.disconnect(lam.subregions[0].results[0])
    assert g.validate() != []
