"""Construction: from the source module to the region graph.

Each function body is taken out of SSA form, restructured, reduced to a
control tree, demand-annotated, and then translated region by region.
A conditional becomes a gamma node whose entry variables are the
demand of its alternatives and whose exit variables are the demand of
whatever follows; a loop becomes a theta node whose loop variables are
the demand of the loop as a whole.  The '.mem' and '.io' pseudo-
variables travel through the same machinery, which threads the two
state edges with no extra cases.

Across functions, the reference graph is split into strongly connected
components: a lone function becomes a lambda, a lone global a delta,
and a recursive component a phi node wrapping its lambdas.  Every
function type is lifted so the state kinds appear as trailing
parameters and results.
"""

import copy

from .types import I64, MEM, IO, lift
from . import ops
from .graph import Graph
from .source import (Var, Lit, GlobalRef, Br, Branch, Ret, Function,
                     MEMVAR, IOVAR, compute_ipg, CMP)
from .parser import check_module
from .ssa import destruct_ssa
from .restructure import restructure, _tarjan
from .controltree import (build_control_tree, annotate, CTBlock, CTLinear,
                          CTBranch, CTLoop, last_block)


class BuildError(Exception):
    pass


def _vartys_of(fn):
    from .types import I1, PTR
    tys = {name: lift(ty) for name, ty in fn.params}
    for b in fn.blocks:
        for i in b.instrs:
            if i.dest is None:
                continue
            if i.op in CMP:
                tys[i.dest] = I1
            elif i.op in ("alloca", "gep"):
                tys[i.dest] = PTR
            else:
                tys[i.dest] = lift(i.ty)
    return tys


class _Emitter:
    def __init__(self, g, vartys):
        self.g = g
        self.vartys = vartys
        self.pending = None         # (port, ty, k): last branch selector
        self.ret = None             # port of the return value

    # -- operands ---------------------------------------------------------

    def resolve(self, o, ty, region, syms):
        if isinstance(o, Var):
            return self.lookup(o.name, region, syms)
        if isinstance(o, GlobalRef):
            return self.lookup("@" + o.name, region, syms)
        return self.g.add_simple(region, ops.const(o.value, lift(ty)), []) \
                   .outputs[0]

    def lookup(self, name, region, syms):
        port = syms.get(name)
        if port is not None:
            return port
        if name.startswith("@") or name in (MEMVAR, IOVAR):
            raise BuildError("no binding for %s" % name)
        # demanded on a path that never defines it; materialize an undef
        ty = self.vartys.get(name)
        if ty is None:
            raise BuildError("no type known for %%%s" % name)
        port = self.g.add_simple(region, ops.undef(ty), []).outputs[0]
        syms[name] = port
        return port

    # -- trees ------------------------------------------------------------

    def emit(self, tree, region, syms):
        if isinstance(tree, CTBlock):
            self._emit_block(tree.block, region, syms)
        elif isinstance(tree, CTLinear):
            for child in tree.children:
                self.emit(child, region, syms)
        elif isinstance(tree, CTBranch):
            self._emit_gamma(tree, region, syms)
        else:
            self._emit_theta(tree, region, syms)

    def _emit_gamma(self, tree, region, syms):
        g = self.g
        sel, sel_ty, k = self._take_pending(len(tree.alts))
        pred = g.add_simple(region, ops.identity_match(sel_ty, k), [sel])
        node = g.begin_gamma(region, pred.outputs[0], k)
        subsyms = [{} for _ in range(k)]
        for v in sorted(tree.demand_in):
            args = g.gamma_add_entry(node, self.lookup(v, region, syms))
            for c in range(k):
                subsyms[c][v] = args[c]
        for c, alt in enumerate(tree.alts):
            self.emit(alt, node.subregions[c], subsyms[c])
        for v in sorted(tree.demand_out):
            origins = [self.lookup(v, node.subregions[c], subsyms[c])
                       for c in range(k)]
            syms[v] = g.gamma_add_exit(node, origins)

    def _emit_theta(self, tree, region, syms):
        g = self.g
        node = g.begin_theta(region)
        body = node.subregions[0]
        loopvars = sorted(tree.demand_in)
        bodysyms = {}
        outs = {}
        for l, v in enumerate(loopvars):
            arg, out = g.theta_add_loopvar(node, self.lookup(v, region, syms))
            bodysyms[v] = arg
            outs[v] = out
        self.emit(tree.body, body, bodysyms)
        sel, sel_ty, k = self._take_pending(None)
        j = tree.repeat_index
        table = [(i, 1 if i == j else 0) for i in range(k)]
        default = 1 if j == k - 1 else 0
        pred = g.add_simple(body, ops.match(sel_ty, table, default, 2), [sel])
        g.theta_set_predicate(node, pred.outputs[0])
        for l, v in enumerate(loopvars):
            g.theta_set_result(node, l, self.lookup(v, body, bodysyms))
            syms[v] = outs[v]

    def _take_pending(self, k):
        if self.pending is None:
            raise BuildError("structure ends without a branch selector")
        sel, sel_ty, sel_k = self.pending
        self.pending = None
        if k is not None and sel_k != k:
            raise BuildError("selector arity %d vs %d alternatives"
                             % (sel_k, k))
        return sel, sel_ty, sel_k

    # -- blocks -----------------------------------------------------------

    def _emit_block(self, block, region, syms):
        for i in block.instrs:
            self._emit_instr(i, region, syms)
        t = block.term
        if isinstance(t, Branch):
            self.pending = (self.resolve(t.operand, t.ty, region, syms),
                            lift(t.ty), len(t.targets))
        elif isinstance(t, Ret) and t.operand is not None:
            self.ret = self.resolve(t.operand, t.ty, region, syms)

    def _emit_instr(self, i, region, syms):
        g = self.g
        op = i.op
        if op == "copy":
            syms[i.dest] = self.resolve(i.operands[0], i.ty, region, syms)
            return
        if op == "undef":
            syms[i.dest] = g.add_simple(region, ops.undef(lift(i.ty)), []) \
                            .outputs[0]
            return
        if op == "alloca":
            n = g.add_simple(region, ops.alloca(lift(i.ty)),
                             [self.lookup(MEMVAR, region, syms)])
            syms[i.dest] = n.outputs[0]
            syms[MEMVAR] = n.outputs[1]
            return
        if op == "load":
            n = g.add_simple(region, ops.load(lift(i.ty)),
                             [self.resolve(i.operands[0], None, region, syms),
                              self.lookup(MEMVAR, region, syms)])
            syms[i.dest] = n.outputs[0]
            syms[MEMVAR] = n.outputs[1]
            return
        if op == "store":
            n = g.add_simple(region, ops.store(lift(i.ty)),
                             [self.resolve(i.operands[1], None, region, syms),
                              self.resolve(i.operands[0], i.ty, region, syms),
                              self.lookup(MEMVAR, region, syms)])
            syms[MEMVAR] = n.outputs[0]
            return
        if op == "gep":
            n = g.add_simple(region, ops.gep(lift(i.ty)),
                             [self.resolve(i.operands[0], None, region, syms),
                              self.resolve(i.operands[1], I64, region, syms)])
            syms[i.dest] = n.outputs[0]
            return
        if op == "call":
            callee = self.resolve(i.callee, None, region, syms)
            if callee.ty.kind != "fn":
                raise BuildError("calling a value of type %s" % callee.ty)
            ins = [callee]
            ins += [self.resolve(o, t, region, syms)
                    for o, t in zip(i.operands, i.arg_tys)]
            ins.append(self.lookup(MEMVAR, region, syms))
            ins.append(self.lookup(IOVAR, region, syms))
            n = g.add_simple(region, ops.apply_op(callee.ty), ins)
            outs = list(n.outputs)
            syms[IOVAR] = outs.pop()
            syms[MEMVAR] = outs.pop()
            if i.dest is not None:
                syms[i.dest] = outs[0]
            return
        if op == "neg":
            n = g.add_simple(region, ops.SimpleOp("neg", lift(i.ty)),
                             [self.resolve(i.operands[0], i.ty, region, syms)])
        else:
            n = g.add_simple(region, ops.binop(op, lift(i.ty)),
                             [self.resolve(i.operands[0], i.ty, region, syms),
                              self.resolve(i.operands[1], i.ty, region, syms)])
        syms[i.dest] = n.outputs[0]


def _drop_unreachable(fn):
    """Remove blocks the entry cannot reach, and phi entries naming
    them.  Unreachable predecessors would otherwise feed bogus edges
    into the restructuring."""
    by_name = {b.name: b for b in fn.blocks}
    seen = {fn.blocks[0].name}
    stack = [fn.blocks[0]]
    while stack:
        for t in _successors(stack.pop().term):
            if t not in seen:
                seen.add(t)
                stack.append(by_name[t])
    fn.blocks = [b for b in fn.blocks if b.name in seen]
    for b in fn.blocks:
        for p in b.phis:
            p.entries = [(o, lbl) for o, lbl in p.entries if lbl in seen]


def _successors(term):
    if isinstance(term, Br):
        return [term.target]
    if isinstance(term, Branch):
        return term.targets
    return []


def _prepare_tree(fn, after, thread_io):
    work = copy.deepcopy(fn)
    _drop_unreachable(work)
    destruct_ssa(work)
    restructure(work)
    tree = build_control_tree(work)
    annotate(tree, after, thread_io=thread_io)
    return work, tree


def translate_function(g, lam, fn, refsyms):
    """Fill a begun lambda node with the translation of `fn`.  `refsyms`
    maps '@name' to the context-variable argument for every global
    reference the body makes."""
    body = lam.subregions[0]
    syms = dict(refsyms)
    for pname, pty in fn.params:
        syms[pname] = g.lambda_add_param(lam, lift(pty))
    syms[MEMVAR] = g.lambda_add_param(lam, MEM)
    syms[IOVAR] = g.lambda_add_param(lam, IO)

    work, tree = _prepare_tree(fn, {MEMVAR, IOVAR}, thread_io=True)
    em = _Emitter(g, _vartys_of(work))
    em.emit(tree, body, syms)
    results = []
    if fn.ret_ty is not None:
        if em.ret is None:
            raise BuildError("@%s never returns a value" % fn.name)
        results.append(em.ret)
    results.append(em.lookup(MEMVAR, body, syms))
    results.append(em.lookup(IOVAR, body, syms))
    return g.lambda_finish(lam, results)


def translate_initializer(g, delta, gv, refsyms):
    """Fill a begun delta node: the initializer runs without the state
    edges, so it must be free of memory and io operations."""
    for b in gv.blocks:
        for i in b.instrs:
            if i.op in ("alloca", "load", "store", "call"):
                raise BuildError(
                    "initializer of @%s uses stateful operation %s"
                    % (gv.name, i.op))
    shim = Function(gv.name, [], gv.ty, blocks=gv.blocks)
    work, tree = _prepare_tree(shim, set(), thread_io=False)
    em = _Emitter(g, _vartys_of(work))
    syms = dict(refsyms)
    em.emit(tree, delta.subregions[0], syms)
    if em.ret is None:
        raise BuildError("initializer of @%s produces no value" % gv.name)
    return g.delta_finish(delta, em.ret)


def construct(module):
    """Translate a whole module into a region graph."""
    check_module(module)
    g = Graph()
    ipg = compute_ipg(module)
    order_index = {n: i for i, n in enumerate(module.order)}

    def succ_of(n):
        return ipg.get(n, [])

    symtab = {}
    for scc in _tarjan(list(module.order), succ_of):
        scc = sorted(scc, key=lambda n: order_index[n])
        recursive = len(scc) > 1 or scc[0] in ipg.get(scc[0], [])
        if not recursive:
            _build_single(g, module, scc[0], symtab)
        else:
            _build_recursive(g, module, scc, symtab)

    for name in module.order:
        ent = module.functions.get(name) or module.globals_.get(name)
        if ent is not None and ent.export:
            g.omega_add_export(name, symtab[name])
    bad = g.validate()
    if bad:
        raise BuildError("construction left a broken graph: %s" % "; ".join(bad))
    return g


def _ref_type(module, name):
    from .types import PTR
    ty = module.type_of(name)
    return lift(ty) if ty.kind == "fn" else PTR


def _build_single(g, module, name, symtab):
    if name in module.externals:
        symtab[name] = g.omega_add_import(name, _ref_type(module, name))
        return
    if name in module.globals_:
        gv = module.globals_[name]
        delta = g.begin_delta(g.root, name, lift(gv.ty))
        refsyms = {}
        for ref in _refs_of(module, name):
            refsyms["@" + ref] = g.add_ctx(delta, symtab[ref])
        symtab[name] = translate_initializer(g, delta, gv, refsyms)
        return
    fn = module.functions[name]
    lam = g.begin_lambda(g.root, name)
    refsyms = {}
    for ref in _refs_of(module, name):
        refsyms["@" + ref] = g.add_ctx(lam, symtab[ref])
    translate_function(g, lam, fn, refsyms)
    symtab[name] = lam.outputs[0]


def _build_recursive(g, module, scc, symtab):
    for name in scc:
        if name not in module.functions:
            raise BuildError("@%s is in a recursive cycle but is not a "
                             "function" % name)
    phi = g.begin_phi(g.root)
    outer = []
    for name in scc:
        for ref in _refs_of(module, name):
            if ref not in scc and ref not in outer:
                outer.append(ref)
    ctxmap = {}
    for ref in outer:
        ctxmap[ref] = g.add_ctx(phi, symtab[ref])
    recmap = {}
    for name in scc:
        arg, out = g.phi_add_rec(phi, lift(module.functions[name].fn_type()))
        recmap[name] = arg
        symtab[name] = out
    body = phi.subregions[0]
    for l, name in enumerate(scc):
        fn = module.functions[name]
        lam = g.begin_lambda(body, name)
        refsyms = {}
        for ref in _refs_of(module, name):
            src = ctxmap[ref] if ref not in scc else recmap[ref]
            refsyms["@" + ref] = g.add_ctx(lam, src)
        translate_function(g, lam, fn, refsyms)
        g.phi_set_rec(phi, l, lam.outputs[0])


def _refs_of(module, name):
    return compute_ipg(module).get(name, [])
