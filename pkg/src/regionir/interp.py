"""Twin reference interpreters.

`eval_cfg` executes the source-level CFG directly; `eval_rvsdg` executes
the region graph demand-driven.  Both produce the same observable
behavior for equivalent programs: the returned values plus a trace of
loads, stores, and external calls.  That pair is the oracle the test
suite compares across construction, optimization, and destruction.

Integer arithmetic wraps in two's complement at the operand width.
Division truncates toward zero and traps on a zero divisor.  Shifts use
the shift amount modulo the width; right shift is arithmetic.  A branch
or match selector outside the covered range takes the last alternative
(the default case).

Global cells live at addresses derived from their names, so removing an
unused global does not shift the addresses in the trace of the rest.
"""

import zlib

from .types import sizeof
from .source import (Var, Lit, GlobalRef, Br, Branch, Ret, Phi, CMP,
                     successors)

DEFAULT_FUEL = 10 ** 7

_ALLOCA_BASE = 1 << 20
_GLOBAL_BASE = 1 << 32

# state tokens; they thread through the graph but carry no data
MEM_TOKEN = "mem"
IO_TOKEN = "io"


class Trap(Exception):
    def __init__(self, kind, detail=""):
        super().__init__("%s%s" % (kind, ": " + detail if detail else ""))
        self.kind = kind


class FnValue:
    """A function value.  Two function values are the same function iff
    they carry the same name; that makes results comparable across the
    two interpreters."""

    def __init__(self, name, node=None, env=None, graph=None, external=False):
        self.name = name
        self.node = node
        self.env = env
        self.graph = graph
        self.external = external

    def __eq__(self, other):
        return isinstance(other, FnValue) and other.name == self.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "fn:@%s" % self.name


def global_addr(name):
    return _GLOBAL_BASE + (zlib.crc32(name.encode("utf-8")) << 8)


def zero_value(ty):
    if ty.kind == "int":
        return 0
    if ty.kind == "f64":
        return 0.0
    if ty.kind in ("ptr", "ctl"):
        return 0
    if ty.kind == "fn":
        return FnValue("<null>")
    if ty.kind == "mem":
        return MEM_TOKEN
    if ty.kind == "io":
        return IO_TOKEN
    raise ValueError("no zero for %s" % ty)


class Machine:
    def __init__(self, fuel=DEFAULT_FUEL, externals=None):
        self.mem = {}               # address -> value
        self.trace = []
        self.fuel = fuel
        self.next_addr = _ALLOCA_BASE
        self.externals = externals or {}
        self.mute = False           # set while running global initializers

    def tick(self, n=1):
        self.fuel -= n
        if self.fuel < 0:
            raise Trap("fuel", "execution budget exhausted")

    def emit(self, *event):
        if not self.mute:
            self.trace.append(event)

    def alloca(self, ty):
        addr = self.next_addr
        self.next_addr += max(64, sizeof(ty))
        self.mem[addr] = None
        return addr

    def load(self, addr):
        if addr not in self.mem or self.mem[addr] is None:
            raise Trap("memory", "load from uninitialized address %d" % addr)
        self.emit("load", addr)
        return self.mem[addr]

    def store(self, addr, value):
        self.mem[addr] = value
        self.emit("store", addr, value)

    def call_external(self, name, args, result_tys):
        value_args = tuple(a for a in args if a not in (MEM_TOKEN, IO_TOKEN))
        self.emit("call", name, value_args)
        if name in self.externals:
            rets = self.externals[name](*value_args)
            rets = list(rets) if isinstance(rets, (list, tuple)) else \
                ([] if rets is None else [rets])
            out = []
            i = 0
            for t in result_tys:
                if t.is_state:
                    out.append(zero_value(t))
                else:
                    out.append(rets[i])
                    i += 1
            return out
        return [zero_value(t) for t in result_tys]


# -- scalar semantics -----------------------------------------------------

def wrap_int(v, width):
    if width == 1:
        return v & 1
    m = 1 << width
    v &= m - 1
    if v >= m >> 1:
        v -= m
    return v


def _idiv(a, b):
    if b == 0:
        raise Trap("div0", "division by zero")
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def eval_binop(op, ty, a, b):
    if ty.kind == "f64":
        if op == "add":
            return a + b
        if op == "sub":
            return a - b
        if op == "mul":
            return a * b
        if op == "div":
            if b == 0.0:
                return float("inf") if a > 0 else float("-inf") if a < 0 \
                    else float("nan")
            return a / b
        if op in CMP:
            return _cmp(op, a, b)
        raise Trap("type", "operation %s on f64" % op)
    w = ty.width
    if op == "add":
        return wrap_int(a + b, w)
    if op == "sub":
        return wrap_int(a - b, w)
    if op == "mul":
        return wrap_int(a * b, w)
    if op == "div":
        return wrap_int(_idiv(a, b), w)
    if op == "rem":
        return wrap_int(a - _idiv(a, b) * b, w)
    if op == "shl":
        return wrap_int(a << (b % w), w)
    if op == "shr":
        return wrap_int(a >> (b % w), w)
    if op == "and":
        return wrap_int(a & b, w)
    if op == "or":
        return wrap_int(a | b, w)
    if op == "xor":
        return wrap_int(a ^ b, w)
    if op in CMP:
        return _cmp(op, a, b)
    raise Trap("type", "unknown operation %s" % op)


def _cmp(op, a, b):
    if op == "eq":
        return int(a == b)
    if op == "ne":
        return int(a != b)
    if op == "lt":
        return int(a < b)
    if op == "le":
        return int(a <= b)
    if op == "gt":
        return int(a > b)
    return int(a >= b)


def coerce_literal(value, ty):
    if ty.kind == "f64":
        return float(value)
    if ty.kind == "int":
        return wrap_int(int(value), ty.width)
    return value


# -- CFG interpreter ------------------------------------------------------

def eval_cfg(module, fn_name, args, fuel=DEFAULT_FUEL, externals=None,
             machine=None):
    """Run an exported or internal function; returns (results, trace)."""
    if machine is None:
        machine = Machine(fuel, externals)
    _init_globals_cfg(module, machine)
    fn = module.functions.get(fn_name)
    if fn is None:
        raise KeyError("no function @%s" % fn_name)
    args = [coerce_literal(a, t) for a, (_, t) in zip(args, fn.params)]
    rets = _call_cfg(module, machine, fn, args)
    return rets, machine.trace


def _init_globals_cfg(module, machine):
    machine.mute = True
    for name in module.order:
        g = module.globals_.get(name)
        if g is None:
            continue
        shim_env = {}
        val = _run_blocks(module, machine, g.blocks, shim_env)
        machine.mem[global_addr(name)] = val[0]
    machine.mute = False


def _call_cfg(module, machine, fn, args):
    env = {name: v for (name, _), v in zip(fn.params, args)}
    return _run_blocks(module, machine, fn.blocks, env)


def _operand(module, env, o, ty):
    if isinstance(o, Var):
        return env[o.name]
    if isinstance(o, Lit):
        return coerce_literal(o.value, ty)
    if o.name in module.globals_:
        return global_addr(o.name)
    t = module.type_of(o.name)
    if t.kind == "fn":
        return FnValue(o.name, external=o.name in module.externals)
    return global_addr(o.name)       # external data


def _run_blocks(module, machine, blocks, env):
    bmap = {b.name: b for b in blocks}
    block = blocks[0]
    prev = None
    while True:
        if prev is not None and block.phis:
            vals = []
            for p in block.phis:
                for o, lbl in p.entries:
                    if lbl == prev:
                        vals.append(_operand(module, env, o, p.ty))
                        break
                else:
                    raise Trap("cfg", "phi without an entry for %s" % prev)
            for p, v in zip(block.phis, vals):
                env[p.dest] = v
        for i in block.instrs:
            machine.tick()
            _exec_instr(module, machine, env, i)
        machine.tick()
        t = block.term
        if isinstance(t, Ret):
            if t.operand is None:
                return []
            return [_operand(module, env, t.operand, t.ty)]
        if isinstance(t, Br):
            target = t.target
        else:
            v = _operand(module, env, t.operand, t.ty)
            if not 0 <= v < len(t.targets):
                v = len(t.targets) - 1
            target = t.targets[v]
        prev = block.name
        block = bmap[target]


def _exec_instr(module, machine, env, i):
    op = i.op
    if op == "call":
        callee = _operand(module, env, i.callee, None)
        args = [_operand(module, env, o, t)
                for o, t in zip(i.operands, i.arg_tys)]
        rets = _dispatch_call(module, machine, callee, args,
                              [] if i.ty is None else [i.ty])
        if i.dest is not None:
            env[i.dest] = rets[0]
        return
    vals = [_operand(module, env, o, i.ty) for o in i.operands]
    if op == "copy":
        env[i.dest] = vals[0]
    elif op == "undef":
        env[i.dest] = zero_value(i.ty)
    elif op == "neg":
        env[i.dest] = -vals[0] if i.ty.kind == "f64" \
            else wrap_int(-vals[0], i.ty.width)
    elif op == "alloca":
        env[i.dest] = machine.alloca(i.ty)
    elif op == "load":
        env[i.dest] = machine.load(vals[0])
    elif op == "store":
        machine.store(vals[1], vals[0])
    elif op == "gep":
        env[i.dest] = vals[0] + int(vals[1]) * sizeof(i.ty)
    else:
        env[i.dest] = eval_binop(op, i.ty, vals[0], vals[1])


def _dispatch_call(module, machine, callee, args, result_tys):
    if not isinstance(callee, FnValue):
        raise Trap("call", "calling a non-function value")
    fn = module.functions.get(callee.name)
    if fn is not None:
        args = [coerce_literal(a, t) for a, (_, t) in zip(args, fn.params)]
        return _call_cfg(module, machine, fn, args)
    if callee.name in module.externals:
        return machine.call_external(callee.name, args, result_tys)
    raise Trap("call", "call to unknown function @%s" % callee.name)


# -- region graph interpreter ---------------------------------------------

def eval_rvsdg(graph, fn_name, args, fuel=DEFAULT_FUEL, externals=None,
               machine=None):
    """Run an exported function of the graph; returns (results, trace).

    The trailing memory-state and io-state arguments and results are
    supplied and stripped here, so the caller passes value arguments
    only, exactly as with eval_cfg.
    """
    if machine is None:
        machine = Machine(fuel, externals)
    env = {}
    for name, arg in zip(graph.import_names, graph.root.args):
        if arg.ty.kind == "fn":
            env[arg] = FnValue(name, external=True)
        else:
            env[arg] = global_addr(name)
    machine.mute = True
    for node in graph.topological_order(graph.root):
        _eval_node(machine, graph, node, env)
    machine.mute = False
    fv = None
    for nm, res in zip(graph.export_names, graph.root.results):
        if nm == fn_name:
            fv = env[res.origin]
    if fv is None:
        raise KeyError("no export named %r" % fn_name)
    fn_ty = fv.node.outputs[0].ty
    vals = [coerce_literal(a, t) for a, t in zip(args, fn_ty.params)]
    vals += [zero_value(t) for t in fn_ty.params[len(vals):]]
    rets = call_value(machine, fv, vals)
    rets = [v for v, t in zip(rets, fn_ty.results) if t.is_value]
    return rets, machine.trace


def call_value(machine, fv, args):
    if fv.node is None:
        raise Trap("call", "call to unbound function @%s" % fv.name)
    body = fv.node.subregions[0]
    env = {}
    for inp, arg in zip(fv.node.inputs, body.args):
        env[arg] = fv.env[inp.origin]
    for arg, v in zip(body.args[fv.node.n_ctx:], args):
        env[arg] = v
    return _eval_region(machine, fv.graph, body, env)


def _eval_region(machine, graph, region, env):
    """Evaluate the live slice of a region; `env` maps ports already
    bound (the arguments) and receives every port evaluated."""
    needed = set()
    stack = [r.origin for r in region.results]
    # a loop nobody reads from still runs -- it may never terminate
    for n in region.nodes:
        if n.kind == "theta":
            needed.add(n.id)
            stack.extend(u.origin for u in n.inputs)
    while stack:
        p = stack.pop()
        if p is None or p.node is None or p.node.region is not region \
                or p.node.id in needed:
            continue
        needed.add(p.node.id)
        stack.extend(u.origin for u in p.node.inputs)
    for node in graph.topological_order(region):
        if node.id in needed:
            machine.tick()
            _eval_node(machine, graph, node, env)
    return [env[r.origin] for r in region.results]


def _eval_node(machine, graph, node, env):
    kind = node.kind
    if kind == "simple":
        _eval_simple(machine, graph, node, env)
    elif kind == "gamma":
        pred = env[node.inputs[0].origin]
        k = len(node.subregions)
        if not 0 <= pred < k:
            raise Trap("ctl", "predicate %d outside ctl%d" % (pred, k))
        sub = node.subregions[pred]
        inner = {}
        for l, use in enumerate(node.inputs[1:]):
            inner[sub.args[l]] = env[use.origin]
        outs = _eval_region(machine, graph, sub, inner)
        for port, v in zip(node.outputs, outs):
            env[port] = v
    elif kind == "theta":
        body = node.subregions[0]
        vals = [env[use.origin] for use in node.inputs]
        while True:
            machine.tick()
            inner = {}
            for arg, v in zip(body.args, vals):
                inner[arg] = v
            outs = _eval_region(machine, graph, body, inner)
            vals = outs[1:]
            if outs[0] == 0:
                break
        for port, v in zip(node.outputs, vals):
            env[port] = v
    elif kind == "lambda":
        env[node.outputs[0]] = FnValue(node.name, node=node, env=env,
                                       graph=graph)
    elif kind == "delta":
        addr = global_addr(node.name)
        body = node.subregions[0]
        inner = {}
        for inp, arg in zip(node.inputs, body.args):
            inner[arg] = env[inp.origin]
        was = machine.mute
        machine.mute = True
        outs = _eval_region(machine, graph, body, inner)
        machine.mute = was
        machine.mem[addr] = outs[0]
        env[node.outputs[0]] = addr
    elif kind == "phi":
        body = node.subregions[0]
        inner = {}
        for inp, arg in zip(node.inputs, body.args[:node.n_ctx]):
            inner[arg] = env[inp.origin]
        for n in graph.topological_order(body):
            _eval_node(machine, graph, n, inner)
        # close the loop: recursion arguments late-bind through `inner`,
        # which the body's function values capture by reference
        for l, res in enumerate(body.results):
            v = inner[res.origin]
            inner[body.args[node.n_ctx + l]] = v
            env[node.outputs[l]] = v
    else:
        raise Trap("graph", "cannot evaluate a %s node" % kind)


def _eval_simple(machine, graph, node, env):
    op = node.op
    vals = [env[use.origin] for use in node.inputs]
    n = op.name

    def out(*vs):
        for port, v in zip(node.outputs, vs):
            env[port] = v

    if n == "const":
        out(coerce_literal(op.value, op.ty))
    elif n == "undef":
        out(zero_value(op.ty))
    elif n == "neg":
        out(-vals[0] if op.ty.kind == "f64" else wrap_int(-vals[0], op.ty.width))
    elif n == "match":
        v = vals[0]
        for key, case in op.table:
            if v == key:
                out(case)
                return
        out(op.default)
    elif n == "alloca":
        out(machine.alloca(op.ty), MEM_TOKEN)
    elif n == "load":
        out(machine.load(vals[0]), MEM_TOKEN)
    elif n == "store":
        machine.store(vals[0], vals[1])
        out(MEM_TOKEN)
    elif n == "gep":
        out(vals[0] + vals[1] * sizeof(op.ty))
    elif n == "apply":
        fv = vals[0]
        if not isinstance(fv, FnValue):
            raise Trap("call", "applying a non-function value")
        if fv.node is None:
            rets = machine.call_external(fv.name, vals[1:],
                                         list(op.ty.results))
        else:
            rets = call_value(machine, fv, vals[1:])
        out(*rets)
    else:
        out(eval_binop(n, op.ty, vals[0], vals[1]))


def run_to_outcome(thunk):
    """Normalize a run to ('ok', results, trace) or ('trap', kind)."""
    try:
        rets, trace = thunk()
        return ("ok", rets, trace)
    except Trap as t:
        return ("trap", t.kind)
