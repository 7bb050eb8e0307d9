"""Construction tests: source module to region graph.

The oracle for behavioral claims is the twin-interpreter comparison
from conftest [DERIVED]; structural claims are [TRIVIAL].
"""

from regionir.parser import parse, check_module
from regionir.build import construct, _prepare_tree, MEMVAR, IOVAR
from regionir.controltree import (CTBlock, CTLinear, CTBranch, CTLoop,
                                  build_control_tree, IrreducibleError)
from regionir.restructure import restructure

from conftest import assert_equivalent, build, load_corpus


def test_corpus_constructs_and_validates(fixture_name):
    """[TRIVIAL] Every corpus program builds a graph with zero
    structural violations."""
    build(load_corpus(fixture_name))


def test_corpus_construction_is_behavior_preserving(fixture_name):
    """[DERIVED] Source and graph agree on random inputs."""
    mod = load_corpus(fixture_name)
    assert_equivalent(mod, build(mod), fixture_name)


def test_unreachable_blocks_are_dropped():
    """[DERIVED] Blocks no path reaches do not confuse construction,
    and their phi entries vanish with them."""
    mod = parse(
        "export define i64 @f(i64 %a) {\n"
        "e:\n  br label %out\n"
        "dead:\n  %x = add i64 %a, 1\n  br label %out\n"
        "out:\n  %v = phi i64 [%a, %e], [%x, %dead]\n  ret i64 %v\n}")
    check_module(mod)
    g = build(mod)
    assert_equivalent(mod, g, "unreachable")


def test_irreducible_cfg_restructures():
    """[DERIVED] A two-entry cycle still builds (the restructurer
    funnels it) and behaves identically."""
    mod = load_corpus("irreducible.ir")
    assert_equivalent(mod, build(mod), "irreducible.ir")


def test_control_tree_rejects_leftover_tangles():
    """[TRIVIAL] build_control_tree refuses a CFG it cannot reduce;
    restructuring first makes the same CFG reducible."""
    mod = load_corpus("irreducible.ir")
    fn = mod.functions["weave"]
    try:
        build_control_tree(fn)
    except IrreducibleError:
        pass
    else:
        raise AssertionError("expected IrreducibleError on the raw CFG")


def test_gcd_tree_shape():
    """[DERIVED] gcd reduces to: entry block, tail-controlled loop
    around the compare/remainder diamond, then the exit blocks."""
    mod = load_corpus("gcd.ir")
    _, tree = _prepare_tree(mod.functions["gcd"], {MEMVAR, IOVAR},
                            thread_io=True)
    assert isinstance(tree, CTLinear)
    assert isinstance(tree.children[0], CTBlock)
    assert tree.children[0].block.name == "entry"
    assert isinstance(tree.children[1], CTLoop)
    loop = tree.children[1]
    assert isinstance(loop.body, CTLinear)
    assert any(isinstance(c, CTBranch) for c in loop.body.children)


def test_gcd_demand_annotation():
    """[DERIVED] The loop node demands exactly the live loop state:
    x and y plus the threaded memory and io pseudo-variables."""
    mod = load_corpus("gcd.ir")
    _, tree = _prepare_tree(mod.functions["gcd"], {MEMVAR, IOVAR},
                            thread_io=True)
    loop = tree.children[1]
    assert sorted(loop.demand_in) == [IOVAR, MEMVAR, "x", "y"]
    assert sorted(loop.reads) == ["x", "y"]


def test_mutual_recursion_shares_one_phi():
    """[TRIVIAL] is_even/is_odd land in a single recursion node."""
    mod = load_corpus("mutual.ir")
    g = build(mod)
    phis = [n for n in g.all_nodes() if n.kind == "phi"]
    assert len(phis) == 1
    lams = [n for n in g.all_nodes() if n.kind == "lambda"]
    assert len(lams) == 3   # is_even, is_odd, parity


def test_globals_become_delta_nodes():
    """[TRIVIAL] Each global turns into one delta in the root region."""
    mod = load_corpus("globals.ir")
    g = build(mod)
    deltas = [n for n in g.root.nodes if n.kind == "delta"]
    assert len(deltas) == len(mod.globals_)


def test_externals_become_imports():
    """[TRIVIAL] Declared externals show up as omega arguments."""
    mod = load_corpus("externals.ir")
    g = build(mod)
    assert len(g.root.args) == len(mod.externals)


def test_restructure_output_is_branch_free_of_cycles():
    """[TRIVIAL] After restructuring, the control tree always builds
    for every corpus function."""
    for name in ("irreducible.ir", "multi_exit.ir", "collatz.ir",
                 "nested_loops.ir"):
        mod = load_corpus(name)
        for fn in mod.functions.values():
            restructure(fn)
            build_control_tree(fn)
