"""Parser and printer for the textual source IR.

The grammar is a small LLVM-flavored syntax; see grammar.md in the
repository root.  print(parse(text)) reaches a fixpoint after one round.
"""

import re

from .types import Ty, I1, I64, F64, PTR, intty, fnty, INT_WIDTHS
from .source import (Module, Function, GlobalVar, Block, Instr, Phi, Br, Branch,
                     Ret, Var, Lit, GlobalRef, ARITH, FLOAT_ARITH, CMP,
                     validate_cfg)


class ParseError(Exception):
    def __init__(self, msg, line, col):
        super().__init__("%d:%d: %s" % (line, col, msg))
        self.line = line
        self.col = col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>[;#][^\n]*)
  | (?P<nl>\n)
  | (?P<float>-?\d+\.\d+(?:[eE][-+]?\d+)?)
  | (?P<int>-?\d+)
  | (?P<var>%[A-Za-z_.][A-Za-z0-9_.]*)
  | (?P<glob>@[A-Za-z_.][A-Za-z0-9_.]*)
  | (?P<word>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<punct>->|[()\[\]{}=:,])
""", re.VERBOSE)


def _tokenize(text):
    toks = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character %r" % text[pos], line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                toks.append((kind, val, line, col))
            col += len(val)
        pos = m.end()
    toks.append(("eof", "", line, col))
    return toks


class Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        if t[0] != "eof":
            self.pos += 1
        return t

    def error(self, msg):
        _, _, line, col = self.peek()
        raise ParseError(msg, line, col)

    def expect(self, val):
        kind, v, line, col = self.next()
        if v != val:
            raise ParseError("expected %r, found %r" % (val, v), line, col)

    def accept(self, val):
        if self.peek()[1] == val:
            self.next()
            return True
        return False

    # -- types ------------------------------------------------------------

    def parse_type(self):
        kind, v, line, col = self.next()
        if v.startswith("i") and v[1:].isdigit() and int(v[1:]) in INT_WIDTHS:
            return intty(int(v[1:]))
        if v == "f64":
            return F64
        if v == "ptr":
            return PTR
        if v == "fn":
            self.expect("(")
            params = []
            if not self.accept(")"):
                params.append(self.parse_type())
                while self.accept(","):
                    params.append(self.parse_type())
                self.expect(")")
            self.expect("->")
            results = self.parse_rettypes()
            return fnty(params, results)
        raise ParseError("expected a type, found %r" % v, line, col)

    def parse_rettypes(self):
        if self.accept("("):
            out = []
            if not self.accept(")"):
                out.append(self.parse_type())
                while self.accept(","):
                    out.append(self.parse_type())
                self.expect(")")
            return out
        return [self.parse_type()]

    # -- operands ---------------------------------------------------------

    def parse_operand(self):
        kind, v, line, col = self.next()
        if kind == "var":
            return Var(v[1:])
        if kind == "glob":
            return GlobalRef(v[1:])
        if kind == "int":
            return Lit(int(v))
        if kind == "float":
            return Lit(float(v))
        raise ParseError("expected an operand, found %r" % v, line, col)

    # -- module -----------------------------------------------------------

    def parse_module(self):
        mod = Module()
        while True:
            kind, v, _, _ = self.peek()
            if kind == "eof":
                break
            export = False
            if v == "export":
                self.next()
                export = True
                v = self.peek()[1]
            if v == "define":
                self.next()
                self._parse_define(mod, export)
            elif v == "global":
                self.next()
                self._parse_global(mod, export)
            elif v == "external":
                if export:
                    self.error("externals cannot be exported")
                self.next()
                self._parse_external(mod)
            else:
                self.error("expected 'define', 'global', or 'external'")
        check_module(mod)
        return mod

    def _name(self):
        kind, v, line, col = self.next()
        if kind != "glob":
            raise ParseError("expected @name, found %r" % v, line, col)
        return v[1:]

    def _unique(self, mod, name):
        if name in mod.order:
            self.error("duplicate definition of @%s" % name)

    def _parse_external(self, mod):
        name = self._name()
        self._unique(mod, name)
        self.expect(":")
        mod.externals[name] = self.parse_type()
        mod.order.append(name)

    def _parse_global(self, mod, export):
        ty = self.parse_type()
        name = self._name()
        self._unique(mod, name)
        self.expect("=")
        self.expect("{")
        blocks = self.parse_blocks()
        self.expect("}")
        mod.globals_[name] = GlobalVar(name, ty, export=export, blocks=blocks)
        mod.order.append(name)

    def _parse_define(self, mod, export):
        if self.peek()[1] == "(":
            self.expect("(")
            self.expect(")")
            ret_ty = None
        else:
            ret_ty = self.parse_type()
        name = self._name()
        self._unique(mod, name)
        self.expect("(")
        params = []
        if not self.accept(")"):
            while True:
                pty = self.parse_type()
                kind, v, line, col = self.next()
                if kind != "var":
                    raise ParseError("expected parameter name", line, col)
                params.append((v[1:], pty))
                if not self.accept(","):
                    break
            self.expect(")")
        self.expect("{")
        blocks = self.parse_blocks()
        self.expect("}")
        mod.functions[name] = Function(name, params, ret_ty, export=export,
                                       blocks=blocks)
        mod.order.append(name)

    # -- blocks and instructions -----------------------------------------

    def parse_blocks(self):
        blocks = []
        while self.peek()[1] != "}":
            kind, v, line, col = self.next()
            if kind != "word" or self.peek()[1] != ":":
                raise ParseError("expected a block label", line, col)
            self.next()
            block = Block(v)
            while True:
                k2, v2, _, _ = self.peek()
                if v2 == "}" or (k2 == "word" and self.peek(1)[1] == ":"):
                    break
                self._parse_line(block)
            if block.term is None:
                raise ParseError("block %s lacks a terminator" % v, line, col)
            blocks.append(block)
        if not blocks:
            self.error("expected at least one block")
        return blocks

    def _parse_line(self, block):
        kind, v, line, col = self.peek()
        if block.term is not None:
            raise ParseError("instruction after terminator", line, col)
        if kind == "var":
            self.next()
            dest = v[1:]
            self.expect("=")
            self._parse_assign(block, dest)
        elif v == "store":
            self.next()
            ty = self.parse_type()
            val = self.parse_operand()
            self.expect(",")
            ptr = self.parse_operand()
            block.instrs.append(Instr("store", ty=ty, operands=[val, ptr]))
        elif v == "call":
            self.next()
            block.instrs.append(self._parse_call(None))
        elif v == "br":
            self.next()
            self.expect("label")
            kind, v, line, col = self.next()
            if kind != "var":
                raise ParseError("expected a label", line, col)
            block.term = Br(v[1:])
        elif v == "branch":
            self.next()
            ty = self.parse_type()
            opnd = self.parse_operand()
            self.expect(",")
            self.expect("[")
            targets = []
            while True:
                kind, v, line, col = self.next()
                if kind != "var":
                    raise ParseError("expected a label", line, col)
                targets.append(v[1:])
                if not self.accept(","):
                    break
            self.expect("]")
            block.term = Branch(ty, opnd, targets)
        elif v == "ret":
            self.next()
            if self.peek()[0] in ("var", "glob", "int", "float") \
                    or self.peek()[1] in ("f64", "ptr", "fn") \
                    or re.fullmatch(r"i\d+", self.peek()[1] or ""):
                ty = self.parse_type()
                block.term = Ret(ty, self.parse_operand())
            else:
                block.term = Ret()
        else:
            self.error("expected an instruction, found %r" % v)

    def _parse_assign(self, block, dest):
        kind, v, line, col = self.next()
        if v == "phi":
            ty = self.parse_type()
            entries = []
            while True:
                self.expect("[")
                o = self.parse_operand()
                self.expect(",")
                k2, v2, l2, c2 = self.next()
                if k2 != "var":
                    raise ParseError("expected a label", l2, c2)
                entries.append((o, v2[1:]))
                self.expect("]")
                if not self.accept(","):
                    break
            block.phis.append(Phi(dest, ty, entries))
            return
        if v == "call":
            block.instrs.append(self._parse_call(dest))
            return
        if v in ARITH or v in CMP:
            ty = self.parse_type()
            a = self.parse_operand()
            self.expect(",")
            b = self.parse_operand()
            block.instrs.append(Instr(v, dest=dest, ty=ty, operands=[a, b]))
            return
        if v in ("neg", "copy"):
            ty = self.parse_type()
            block.instrs.append(Instr(v, dest=dest, ty=ty,
                                      operands=[self.parse_operand()]))
            return
        if v == "undef":
            block.instrs.append(Instr("undef", dest=dest, ty=self.parse_type()))
            return
        if v == "alloca":
            block.instrs.append(Instr("alloca", dest=dest, ty=self.parse_type()))
            return
        if v == "load":
            ty = self.parse_type()
            self.expect(",")
            block.instrs.append(Instr("load", dest=dest, ty=ty,
                                      operands=[self.parse_operand()]))
            return
        if v == "gep":
            ty = self.parse_type()
            p = self.parse_operand()
            self.expect(",")
            i = self.parse_operand()
            block.instrs.append(Instr("gep", dest=dest, ty=ty, operands=[p, i]))
            return
        raise ParseError("unknown instruction %r" % v, line, col)

    def _parse_call(self, dest):
        if self.accept("("):
            self.expect(")")
            ret_ty = None
        else:
            ret_ty = self.parse_type()
        callee = self.parse_operand()
        if isinstance(callee, Lit):
            self.error("callee must be a function value")
        self.expect("(")
        args, arg_tys = [], []
        if not self.accept(")"):
            while True:
                arg_tys.append(self.parse_type())
                args.append(self.parse_operand())
                if not self.accept(","):
                    break
            self.expect(")")
        return Instr("call", dest=dest, ty=ret_ty, operands=args,
                     callee=callee, arg_tys=arg_tys)


def parse(text):
    return Parser(text).parse_module()


def parse_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


# -- semantic checks ------------------------------------------------------

class SourceError(Exception):
    pass


def check_module(mod):
    for name in mod.order:
        ent = mod.functions.get(name) or mod.globals_.get(name)
        if ent is None:
            continue
        _check_body(mod, ent)
    bad = []
    for fn in mod.functions.values():
        bad += ["%s: %s" % (fn.name, v)
                for v in validate_cfg(fn, mod, mode="none")]
    for g in mod.globals_.values():
        shim = Function(g.name, [], g.ty, blocks=g.blocks)
        bad += ["%s: %s" % (g.name, v)
                for v in validate_cfg(shim, mod, mode="none")]
    if bad:
        raise SourceError("; ".join(bad))


def _check_body(mod, ent):
    vartys = {}
    if isinstance(ent, Function):
        for pname, pty in ent.params:
            vartys[pname] = pty

    def dest_ty(i):
        if i.op in CMP:
            return I1
        if i.op in ("alloca", "gep"):
            return PTR
        return i.ty

    for b in ent.blocks:
        for p in b.phis:
            _settle(vartys, p.dest, p.ty, ent.name)
        for i in b.instrs:
            if i.op == "call" and i.dest is not None:
                _settle(vartys, i.dest, i.ty, ent.name)
            elif i.dest is not None:
                _settle(vartys, i.dest, dest_ty(i), ent.name)
    for b in ent.blocks:
        for i in b.instrs:
            for o in i.operands + ([i.callee] if i.op == "call" else []):
                _check_operand(mod, vartys, o, ent.name)
        for p in b.phis:
            for o, _ in p.entries:
                _check_operand(mod, vartys, o, ent.name)
        t = b.term
        if isinstance(t, Branch):
            _check_operand(mod, vartys, t.operand, ent.name)
            if t.ty.kind != "int":
                raise SourceError("%s: branch selector must be an integer"
                                  % ent.name)
            if isinstance(t.operand, Var):
                # a wider declared type is harmless, a narrower one clips
                vty = vartys[t.operand.name]
                if vty.kind != "int" or vty.width > t.ty.width:
                    raise SourceError("%s: branch selector %%%s is %s, not %s"
                                      % (ent.name, t.operand.name, vty, t.ty))
        elif isinstance(t, Ret) and t.operand is not None:
            _check_operand(mod, vartys, t.operand, ent.name)
            if isinstance(t.operand, Var):
                vty = vartys[t.operand.name]
                narrowing = (vty.kind == "int" and t.ty.kind == "int"
                             and vty.width > t.ty.width)
                if vty.kind != t.ty.kind or narrowing:
                    raise SourceError("%s: returns %%%s as %s but it is %s"
                                      % (ent.name, t.operand.name, t.ty, vty))
    ent._vartys = vartys


def _settle(vartys, name, ty, where):
    if ty is None:
        raise SourceError("%s: %%%s has no type" % (where, name))
    old = vartys.get(name)
    if old is not None and old != ty:
        raise SourceError("%s: %%%s assigned as both %s and %s"
                          % (where, name, old, ty))
    vartys[name] = ty


def _check_operand(mod, vartys, o, where):
    if isinstance(o, Var):
        if o.name not in vartys:
            raise SourceError("%s: use of undefined %%%s" % (where, o.name))
    elif isinstance(o, GlobalRef):
        try:
            mod.type_of(o.name)
        except KeyError:
            raise SourceError("%s: reference to undefined @%s" % (where, o.name))


# -- printer --------------------------------------------------------------

def _fmt_operand(o):
    return str(o)


def _fmt_instr(i):
    if isinstance(i, Phi):
        ent = ", ".join("[%s, %%%s]" % (o, lbl) for o, lbl in i.entries)
        return "%%%s = phi %s %s" % (i.dest, i.ty, ent)
    if i.op == "store":
        return "store %s %s, %s" % (i.ty, i.operands[0], i.operands[1])
    if i.op == "call":
        args = ", ".join("%s %s" % (t, o) for t, o in zip(i.arg_tys, i.operands))
        rt = "()" if i.ty is None else str(i.ty)
        head = "" if i.dest is None else "%%%s = " % i.dest
        return "%scall %s %s(%s)" % (head, rt, i.callee, args)
    if i.op in ("undef", "alloca"):
        return "%%%s = %s %s" % (i.dest, i.op, i.ty)
    if i.op == "load":
        return "%%%s = load %s, %s" % (i.dest, i.ty, i.operands[0])
    ops = ", ".join(str(o) for o in i.operands)
    return "%%%s = %s %s %s" % (i.dest, i.op, i.ty, ops)


def _fmt_term(t):
    if isinstance(t, Br):
        return "br label %%%s" % t.target
    if isinstance(t, Branch):
        tg = ", ".join("%%%s" % x for x in t.targets)
        return "branch %s %s, [%s]" % (t.ty, t.operand, tg)
    if t.operand is None:
        return "ret"
    return "ret %s %s" % (t.ty, t.operand)


def _fmt_blocks(blocks, out):
    for b in blocks:
        out.append("%s:" % b.name)
        for p in b.phis:
            out.append("  " + _fmt_instr(p))
        for i in b.instrs:
            out.append("  " + _fmt_instr(i))
        out.append("  " + _fmt_term(b.term))


def print_module(mod):
    out = []
    for name in mod.order:
        if name in mod.externals:
            out.append("external @%s : %s" % (name, mod.externals[name]))
        elif name in mod.globals_:
            g = mod.globals_[name]
            head = "export " if g.export else ""
            out.append("%sglobal %s @%s = {" % (head, g.ty, name))
            _fmt_blocks(g.blocks, out)
            out.append("}")
        else:
            fn = mod.functions[name]
            head = "export " if fn.export else ""
            rt = "()" if fn.ret_ty is None else str(fn.ret_ty)
            ps = ", ".join("%s %%%s" % (t, n) for n, t in fn.params)
            out.append("%sdefine %s @%s(%s) {" % (head, rt, name, ps))
            _fmt_blocks(fn.blocks, out)
            out.append("}")
        out.append("")
    return "\n".join(out)
