"""Control tree recovery and demand annotation.

After restructuring, the CFG reduces to a tree under three rules:
merging linear chains, collapsing a branch whose alternatives all
reconverge on one point, and folding a node with a self edge into a
tail-controlled loop.  A CFG that does not reduce to a single node is
rejected.

Demand annotation then computes, for every tree node, the variables it
needs on entry (`demand_in`) and the variables still needed after it
(`demand_out`).  The pseudo-variables '.mem' and '.io' are threaded by
the read/write sets of stateful instructions, so state routing falls
out of the same bookkeeping as ordinary variables.
"""

from .source import Branch, Ret, instr_reads, instr_writes, successors
from .source import IOVAR


class IrreducibleError(Exception):
    pass


class CTBlock:
    def __init__(self, block):
        self.block = block

    def __repr__(self):
        return "B(%s)" % self.block.name


class CTLinear:
    def __init__(self, children):
        self.children = children

    def __repr__(self):
        return "Linear%r" % (self.children,)


class CTBranch:
    def __init__(self, alts):
        self.alts = alts

    def __repr__(self):
        return "Branch%r" % (self.alts,)


class CTLoop:
    def __init__(self, body, repeat_index):
        self.body = body
        self.repeat_index = repeat_index

    def __repr__(self):
        return "Loop[%r @%d]" % (self.body, self.repeat_index)


def last_block(tree):
    """The basic block a subtree hands control off from."""
    if isinstance(tree, CTBlock):
        return tree.block
    if isinstance(tree, CTLinear):
        return last_block(tree.children[-1])
    raise IrreducibleError("subtree %r has no unique final block" % tree)


def _linear(a, b):
    xs = a.children if isinstance(a, CTLinear) else [a]
    ys = b.children if isinstance(b, CTLinear) else [b]
    return CTLinear(xs + ys)


def build_control_tree(fn):
    """Reduce the (restructured) CFG of `fn` to a single control tree."""
    ids = {b.name: i for i, b in enumerate(fn.blocks)}
    payload = {}
    succs = {}
    preds = {}
    for b in fn.blocks:
        i = ids[b.name]
        payload[i] = CTBlock(b)
        succs[i] = [ids[t] for t in successors(b.term)]
        preds.setdefault(i, set())
    for i, ss in succs.items():
        for s in ss:
            preds[s].add(i)

    def drop(nid):
        del payload[nid], succs[nid], preds[nid]

    changed = True
    while changed and len(payload) > 1:
        changed = False
        for n in sorted(payload):
            if n not in payload:
                continue
            ss = succs[n]
            # self loop
            if n in ss:
                idx = ss.index(n)
                payload[n] = CTLoop(payload[n], idx)
                succs[n] = [s for s in ss if s != n]
                preds[n].discard(n)
                changed = True
                continue
            # linear chain
            if len(ss) == 1:
                s = ss[0]
                if preds[s] == {n} and s not in succs[s]:
                    payload[n] = _linear(payload[n], payload[s])
                    succs[n] = succs[s]
                    for t in succs[s]:
                        preds[t].discard(s)
                        preds[t].add(n)
                    drop(s)
                    changed = True
                    continue
            # symmetric branch
            if len(ss) >= 2 and len(set(ss)) == len(ss) and n not in ss:
                ok = all(preds[a] == {n} and len(succs[a]) == 1 for a in ss)
                if ok:
                    exits = {succs[a][0] for a in ss}
                    if len(exits) == 1 and exits != {n} and not exits & set(ss):
                        x = exits.pop()
                        a0 = ss[0]
                        payload[a0] = CTBranch([payload[a] for a in ss])
                        succs[a0] = [x]
                        for a in ss[1:]:
                            preds[x].discard(a)
                            drop(a)
                        succs[n] = [a0]
                        changed = True
                        continue
    if len(payload) != 1:
        raise IrreducibleError(
            "%s does not reduce: %d nodes remain" % (fn.name, len(payload)))
    (tree,) = payload.values()
    return tree


# -- demand annotation ----------------------------------------------------

def _block_items(block):
    return list(block.phis) + list(block.instrs) + [block.term]


def _rw(tree):
    """Bottom-up upward-exposed read set and write set per node."""
    if isinstance(tree, CTBlock):
        r, w = set(), set()
        for item in reversed(_block_items(tree.block)):
            r -= set(instr_writes(item))
            r |= set(instr_reads(item))
            w |= set(instr_writes(item))
    elif isinstance(tree, CTLinear):
        r, w = set(), set()
        for child in reversed(tree.children):
            cr, cw = _rw(child)
            r = (r - cw) | cr
            w = w | cw
    elif isinstance(tree, CTBranch):
        rs, ws = zip(*(_rw(a) for a in tree.alts))
        r = set().union(*rs)
        w = set.intersection(*ws)
    else:
        r, w = _rw(tree.body)
    tree.reads, tree.writes = r, w
    return r, w


def _demand(tree, after, thread_io):
    tree.demand_out = set(after)
    if isinstance(tree, CTBlock):
        tree.demand_in = (after - tree.writes) | tree.reads
    elif isinstance(tree, CTLinear):
        d = after
        for child in reversed(tree.children):
            _demand(child, d, thread_io)
            d = child.demand_in
        tree.demand_in = d
    elif isinstance(tree, CTBranch):
        for a in tree.alts:
            _demand(a, set(after), thread_io)
        tree.demand_in = set().union(*(a.demand_in for a in tree.alts))
    else:
        d = set(after) | tree.reads
        if thread_io:
            d.add(IOVAR)
        _demand(tree.body, d, thread_io)
        tree.demand_in = d
        tree.demand_out = d

def annotate(tree, after, thread_io=True):
    """Attach demand_in/demand_out everywhere; `after` is the demand at
    the end of the whole tree (the translated region's results)."""
    _rw(tree)
    _demand(tree, set(after), thread_io)
    return tree
