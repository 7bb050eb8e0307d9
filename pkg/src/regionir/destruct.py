"""Destruction: from the region graph back to a source module.

The omega region is walked in topological order: lambdas become
functions, deltas become globals with initializer bodies, and the
lambdas inside a phi become mutually recursive functions.  Inside each
body, structured control flow is reconstructed directly: a gamma
becomes a k-way branch whose alternatives rejoin through exit-variable
copies, a theta becomes a do-while whose latch reassigns the loop
variables with a sequentialized parallel copy.  State-typed ports
vanish; the instruction order of the emitted blocks preserves the
state edge order because emission follows a topological order.

The blocks come out in non-SSA form and are put back into SSA by the
standard reconstruction before the module is returned.
"""

from .types import I1, I64, PTR, lower
from .source import (Module, Function, GlobalVar, Block, Instr, Br, Branch,
                     Ret, Var, Lit, GlobalRef)
from .ssa import construct_ssa, sequence_parallel_copies


class DestructError(Exception):
    pass


def _sty(ty):
    """Source-level type of a graph port type.  Control types widen to
    i64: eliding an identity match leaves the raw selector in the
    variable, and a narrow copy could clip an out-of-range value that
    the consuming branch would have defaulted."""
    if ty.kind == "ctl":
        return I64
    if ty.kind == "fn":
        return lower(ty)
    if ty.is_state:
        return None
    return ty


class _Names:
    def __init__(self):
        self.n = 0

    def fresh(self, stem="v"):
        self.n += 1
        return "%s%d" % (stem, self.n)


class _Lowerer:
    """Reconstructs one function-like body (a lambda or delta region)."""

    def __init__(self, graph, refmap):
        self.g = graph
        self.refmap = refmap        # region arg Port -> referenced global name
        self.names = _Names()
        self.tys = {}               # var name -> source type
        self.blocks = []
        self.cur = self._block()

    def _block(self):
        b = Block(self.names.fresh("b"))
        self.blocks.append(b)
        return b

    def emit(self, instr):
        self.cur.instrs.append(instr)
        if instr.dest is not None:
            if instr.op in ("eq", "ne", "lt", "le", "gt", "ge"):
                self.tys[instr.dest] = I1
            elif instr.op in ("alloca", "gep"):
                self.tys[instr.dest] = PTR
            else:
                self.tys[instr.dest] = instr.ty

    def operand(self, env, use):
        return env[use.origin]

    def selector_ty(self, o):
        """The declared type of a branch selector operand."""
        if isinstance(o, Var):
            return self.tys.get(o.name, I64)
        return I64

    def run(self, region, env, ret_ty):
        results = self.lower_region(region, env)
        vals = [v for v, r in zip(results, region.results) if not r.ty.is_state]
        if ret_ty is None:
            self.cur.term = Ret()
        else:
            if len(vals) != 1:
                raise DestructError("expected one value result, found %d"
                                    % len(vals))
            self.cur.term = Ret(ret_ty, vals[0])
        return self.blocks

    def lower_region(self, region, env):
        for node in self.g.topological_order(region):
            self.lower_node(node, env)
        return [env.get(r.origin) for r in region.results]

    def lower_node(self, node, env):
        if node.kind == "simple":
            self.lower_simple(node, env)
        elif node.kind == "gamma":
            self.lower_gamma(node, env)
        elif node.kind == "theta":
            self.lower_theta(node, env)
        else:
            raise DestructError("a %s node cannot appear inside a function "
                                "body" % node.kind)

    # -- structural nodes -------------------------------------------------

    def lower_gamma(self, node, env):
        pred = self.operand(env, node.inputs[0])
        exit_ports = [o for o in node.outputs if not o.ty.is_state]
        exit_vars = {o: self.names.fresh() for o in exit_ports}
        head = self.cur
        cont = Block(self.names.fresh("b"))
        alt_names = []
        for sub in node.subregions:
            blk = self._block()
            alt_names.append(blk.name)
            self.cur = blk
            inner = {}
            for l, use in enumerate(node.inputs[1:]):
                inner[sub.args[l]] = None if use.ty.is_state \
                    else self.operand(env, use)
            self.lower_region(sub, inner)
            for o in exit_ports:
                res = sub.results[o.index]
                self.emit(Instr("copy", dest=exit_vars[o], ty=_sty(o.ty),
                                operands=[inner[res.origin]]))
            self.cur.term = Br(cont.name)
        head.term = Branch(self.selector_ty(pred), pred, alt_names)
        self.blocks.append(cont)
        self.cur = cont
        for o in exit_ports:
            env[o] = Var(exit_vars[o])

    def lower_theta(self, node, env):
        g = self.g
        body = node.subregions[0]
        loop = [(l, use) for l, use in enumerate(node.inputs)
                if not use.ty.is_state]
        carried = {}
        for l, use in loop:
            w = self.names.fresh()
            carried[l] = w
            self.emit(Instr("copy", dest=w, ty=_sty(use.ty),
                            operands=[self.operand(env, use)]))
        head = self._block()
        self.cur.term = Br(head.name)
        self.cur = head
        inner = {}
        for l, use in enumerate(node.inputs):
            inner[body.args[l]] = Var(carried[l]) if l in carried else None
        self.lower_region(body, inner)
        pred = inner[body.results[0].origin]
        pairs = []
        for l, use in loop:
            res = body.results[l + 1]
            pairs.append((carried[l], _sty(use.ty), inner[res.origin]))
        for instr in sequence_parallel_copies(pairs, self.names):
            self.emit(instr)
        exit_blk = Block(self.names.fresh("b"))
        # out-of-range selectors take the last target, so a repeating
        # match default and the repeat block must both sit last
        self.cur.term = Branch(self.selector_ty(pred), pred,
                               [exit_blk.name, head.name])
        self.blocks.append(exit_blk)
        self.cur = exit_blk
        for l, use in loop:
            env[node.outputs[l]] = Var(carried[l])

    # -- simple nodes -----------------------------------------------------

    def lower_simple(self, node, env):
        op = node.op
        n = op.name
        ins = [use for use in node.inputs if not use.ty.is_state]

        if n == "const":
            env[node.outputs[0]] = Lit(op.value)
            return
        if n == "undef":
            d = self.names.fresh()
            self.emit(Instr("undef", dest=d, ty=_sty(op.ty)))
            env[node.outputs[0]] = Var(d)
            return
        if n == "match":
            if op.table != tuple((i, i) for i in range(op.k)) \
                    or op.default != op.k - 1:
                raise DestructError("match %s is not reconstructible" % op)
            env[node.outputs[0]] = self.operand(env, ins[0])
            return
        if n == "alloca":
            d = self.names.fresh()
            self.emit(Instr("alloca", dest=d, ty=_sty(op.ty)))
            env[node.outputs[0]] = Var(d)
            return
        if n == "load":
            d = self.names.fresh()
            self.emit(Instr("load", dest=d, ty=_sty(op.ty),
                            operands=[self.operand(env, ins[0])]))
            env[node.outputs[0]] = Var(d)
            return
        if n == "store":
            self.emit(Instr("store", ty=_sty(op.ty),
                            operands=[self.operand(env, ins[1]),
                                      self.operand(env, ins[0])]))
            return
        if n == "gep":
            d = self.names.fresh()
            self.emit(Instr("gep", dest=d, ty=_sty(op.ty),
                            operands=[self.operand(env, ins[0]),
                                      self.operand(env, ins[1])]))
            env[node.outputs[0]] = Var(d)
            return
        if n == "apply":
            fnty = lower(op.ty)
            callee = self.operand(env, ins[0])
            args = [self.operand(env, u) for u in ins[1:]]
            if len(fnty.results) > 1:
                raise DestructError("call with %d value results"
                                    % len(fnty.results))
            ret_ty = fnty.results[0] if fnty.results else None
            dest = self.names.fresh() if ret_ty is not None else None
            self.emit(Instr("call", dest=dest, ty=ret_ty, operands=args,
                            callee=callee, arg_tys=list(fnty.params)))
            for o in node.outputs:
                if not o.ty.is_state:
                    env[o] = Var(dest)
            return
        # arithmetic, comparison, negation
        d = self.names.fresh()
        self.emit(Instr(n, dest=d, ty=op.ty,
                        operands=[self.operand(env, u) for u in ins]))
        env[node.outputs[0]] = Var(d)


# -- module assembly ------------------------------------------------------

def _lower_lambda(graph, node, portname):
    body = node.subregions[0]
    env = {}
    for inp, arg in zip(node.inputs, body.args):
        env[arg] = GlobalRef(portname[inp.origin])
    fn_ty = lower(node.outputs[0].ty)
    params = []
    value_args = [a for a in body.args[node.n_ctx:] if not a.ty.is_state]
    low = _Lowerer(graph, portname)
    for a, pty in zip(value_args, fn_ty.params):
        pname = low.names.fresh("a")
        params.append((pname, pty))
        low.tys[pname] = pty
        env[a] = Var(pname)
    ret_ty = fn_ty.results[0] if fn_ty.results else None
    blocks = low.run(body, env, ret_ty)
    fn = Function(node.name, params, ret_ty, blocks=blocks)
    construct_ssa(fn)
    return fn


def _lower_delta(graph, node, portname):
    body = node.subregions[0]
    env = {}
    for inp, arg in zip(node.inputs, body.args):
        env[arg] = GlobalRef(portname[inp.origin])
    elem_ty = lower(node.op.ty)
    low = _Lowerer(graph, portname)
    blocks = low.run(body, env, elem_ty)
    shim = Function(node.name, [], elem_ty, blocks=blocks)
    construct_ssa(shim)
    return GlobalVar(node.name, elem_ty, blocks=shim.blocks)


def destruct(graph):
    """Lower a whole graph back to a source module."""
    module = Module()
    portname = {}
    for name, arg in zip(graph.import_names, graph.root.args):
        module.externals[name] = lower(arg.ty)
        module.order.append(name)
        portname[arg] = name

    for node in graph.topological_order(graph.root):
        if node.kind == "lambda":
            portname[node.outputs[0]] = node.name
            module.functions[node.name] = _lower_lambda(graph, node, portname)
            module.order.append(node.name)
        elif node.kind == "delta":
            portname[node.outputs[0]] = node.name
            module.globals_[node.name] = _lower_delta(graph, node, portname)
            module.order.append(node.name)
        elif node.kind == "phi":
            _lower_phi(graph, node, portname, module)
        else:
            raise DestructError("%s node at the top level" % node.kind)

    for name, res in zip(graph.export_names, graph.root.results):
        ent_name = portname.get(res.origin)
        if ent_name is None:
            raise DestructError("export %r has no named origin" % name)
        ent = module.functions.get(ent_name) or module.globals_.get(ent_name)
        ent.export = True
    return module


def _lower_phi(graph, node, portname, module):
    body = node.subregions[0]
    refname = {}
    for inp, arg in zip(node.inputs, body.args[:node.n_ctx]):
        refname[arg] = portname[inp.origin]
    for l, res in enumerate(body.results):
        lam = res.origin.node
        if lam is None or lam.kind != "lambda":
            raise DestructError("recursion variable %d is not a lambda" % l)
        refname[body.args[node.n_ctx + l]] = lam.name
        portname[node.outputs[l]] = lam.name
    for inner in graph.topological_order(body):
        if inner.kind != "lambda":
            raise DestructError("a %s node inside a recursion environment"
                                % inner.kind)
        portname[inner.outputs[0]] = inner.name
        local = dict(portname)
        local.update(refname)
        module.functions[inner.name] = _lower_lambda(graph, inner, local)
        module.order.append(inner.name)
