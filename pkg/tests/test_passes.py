"""Per-pass unit tests.

Each optimization claim is checked two ways: structurally, against the
documented effect of the pass on a fixture crafted to exercise it, and
behaviorally through the twin-interpreter oracle [DERIVED].  Counting
helpers are [TRIVIAL].
"""

import pytest

from regionir.parser import parse, check_module
from regionir.render import dump
from regionir.passes import PassConfig, PassError, run_pipeline
from regionir.passes.pipeline import (DEFAULT_ORDER, PASSES, format_stats,
                                      node_count, parse_passes)
from regionir.passes import cne, dne, iln, inv, ivt, pll, psh, red, url

from conftest import assert_equivalent, build, load_corpus


def _ops(graph, name, region_pred=None):
    return [n for n in graph.all_nodes()
            if n.kind == "simple" and n.op.name == name
            and (region_pred is None or region_pred(n.region))]


def _inside(kind):
    def pred(region):
        while region is not None and region.owner is not None:
            if region.owner.kind == kind:
                return True
            region = region.owner.region
        return False
    return pred


def _checked(mod, graph, fixture):
    assert graph.validate() == []
    assert_equivalent(mod, graph, fixture)


# -- DNE --------------------------------------------------------------------

def test_dne_removes_exactly_the_dead_chain():
    """[DERIVED] deadcode.ir has a two-node dead chain; DNE removes
    both and nothing else."""
    mod = load_corpus("deadcode.ir")
    g = build(mod)
    before = node_count(g)
    dne.run(g)
    assert node_count(g) == before - 2
    assert _ops(g, "mul") == []
    assert len(_ops(g, "add")) == 1
    _checked(mod, g, "deadcode.ir")


def test_dne_is_idempotent():
    """[DERIVED] A second run changes nothing, byte for byte."""
    g = build(load_corpus("loop_motion.ir"))
    dne.run(g)
    once = dump(g)
    dne.run(g)
    assert dump(g) == once


def test_dne_keeps_a_loop_nobody_reads():
    """[DERIVED] A possibly-endless loop whose outputs are dead still
    runs: deleting it would turn non-termination into termination."""
    mod = load_corpus("endless.ir")
    g = build(mod)
    dne.run(g)
    assert any(n.kind == "theta" for n in g.all_nodes())
    from conftest import outcome_cfg, outcome_rvsdg
    assert outcome_rvsdg(g, "spin", [1], fuel=3000) == ("trap", "fuel")
    assert outcome_rvsdg(g, "spin", [0], fuel=3000) == ("ok", [0], [])


def test_dne_mark_matches_sweep():
    """[DERIVED] After one sweep every surviving node is demanded or
    pinned: a fresh mark finds zero dead nodes."""
    for fixture in ("deadcode.ir", "loop_motion.ir", "mutual.ir"):
        g = build(load_corpus(fixture))
        dne.run(g)
        demanded, kept = dne.mark(g)
        dead = [n for n in g.all_nodes()
                if n.outputs and n not in kept
                and not any(o in demanded for o in n.outputs)]
        assert dead == []


# -- CNE --------------------------------------------------------------------

def test_cne_merges_congruent_multiplications():
    """[DERIVED] The four-multiplication kernel has two congruent
    products; CNE plus DNE leaves exactly three."""
    mod = load_corpus("mul_chain.ir")
    g = build(mod)
    assert len(_ops(g, "mul")) == 4
    cne.run(g)
    dne.run(g)
    assert len(_ops(g, "mul")) == 3
    _checked(mod, g, "mul_chain.ir")


def test_cne_never_merges_loads_across_a_store():
    """[DERIVED] Two loads of the same address separated by a store
    have different memory-state origins and must both survive."""
    mod = load_corpus("loads_state.ir")
    g = build(mod)
    n_loads = len(_ops(g, "load"))
    cne.run(g)
    dne.run(g)
    assert len(_ops(g, "load")) == n_loads
    _checked(mod, g, "loads_state.ir")


def test_cne_dedupes_constants_per_region():
    """[TRIVIAL] Two identical literals in one region end up shared."""
    mod = parse("export define i64 @f(i64 %a) {\n"
                "e:\n  %x = add i64 %a, 7\n  %y = mul i64 %a, 7\n"
                "  %z = add i64 %x, %y\n  ret i64 %z\n}")
    check_module(mod)
    g = build(mod)
    cne.run(g)
    dne.run(g)
    assert len(_ops(g, "const")) == 1
    _checked(mod, g, "two sevens")


# -- INV --------------------------------------------------------------------

def test_inv_diverts_unchanging_loop_variables():
    """[DERIVED] Loop variables that feed themselves back become reads
    of the theta input; DNE can then trim them."""
    mod = load_corpus("loop_motion.ir")
    g = build(mod)
    theta = next(n for n in g.all_nodes() if n.kind == "theta")
    before = len(theta.inputs)
    inv.run(g)
    dne.run(g)
    assert len(theta.inputs) < before
    _checked(mod, g, "loop_motion.ir")


# -- RED --------------------------------------------------------------------

def test_red_folds_constants():
    """[DERIVED] 2+3 folds away; x*1 and x+0 reduce to x."""
    mod = parse("export define i64 @f(i64 %a) {\n"
                "e:\n  %c = add i64 2, 3\n  %d = mul i64 %a, 1\n"
                "  %e = add i64 %d, 0\n  %r = add i64 %e, %c\n"
                "  ret i64 %r\n}")
    check_module(mod)
    g = build(mod)
    red.run(g)
    dne.run(g)
    # only the final %r addition survives
    assert len(_ops(g, "add")) == 1
    assert _ops(g, "mul") == []
    _checked(mod, g, "folding")


def test_red_inlines_constant_predicate_gamma():
    """[DERIVED] A branch on a constant selector disappears."""
    mod = parse("export define i64 @f(i64 %a) {\n"
                "e:\n  %c = lt i64 0, 1\n  branch i1 %c, [%x, %y]\n"
                "x:\n  ret i64 0\ny:\n  ret i64 %a\n}")
    check_module(mod)
    g = build(mod)
    red.run(g)
    dne.run(g)
    assert not any(n.kind == "gamma" for n in g.all_nodes())
    _checked(mod, g, "const branch")


def test_red_leaves_division_by_zero_alone():
    """[TRIVIAL] Folding 1/0 would erase the trap; RED must not."""
    mod = parse("export define i64 @f() {\n"
                "e:\n  %q = div i64 1, 0\n  ret i64 %q\n}")
    check_module(mod)
    g = build(mod)
    red.run(g)
    assert len(_ops(g, "div")) == 1
    _checked(mod, g, "div0 kept")


# -- PSH --------------------------------------------------------------------

def test_psh_hoists_invariant_work_out_of_the_loop():
    """[DERIVED] The loop kernel computes b+c and b-d afresh every
    iteration; PSH recomputes them once outside the theta."""
    mod = load_corpus("loop_motion.ir")
    g = build(mod)
    in_theta = _inside("theta")
    inv.run(g)
    n_before = len(_ops(g, "add", in_theta)) + len(_ops(g, "sub", in_theta))
    psh.run(g)
    dne.run(g)
    n_after = len(_ops(g, "add", in_theta)) + len(_ops(g, "sub", in_theta))
    assert n_after < n_before
    _checked(mod, g, "loop_motion.ir")


def test_psh_does_not_hoist_trapping_ops_out_of_gamma():
    """[TRIVIAL] A division guarded by a branch stays guarded."""
    mod = load_corpus("div_guard.ir")
    g = build(mod)
    in_gamma = _inside("gamma")
    n_before = len(_ops(g, "div", in_gamma))
    assert n_before >= 1
    psh.run(g)
    assert len(_ops(g, "div", in_gamma)) == n_before
    _checked(mod, g, "div_guard.ir")


# -- PLL --------------------------------------------------------------------

def test_pll_moves_single_branch_work_into_the_branch():
    """[DERIVED] A value consumed by exactly one gamma alternative is
    recomputed inside it, so the untaken path never pays for it."""
    mod = parse("export define i64 @f(i64 %a, i64 %b) {\n"
                "e:\n  %w = mul i64 %a, %b\n  %c = lt i64 %a, 0\n"
                "  branch i1 %c, [%t, %u]\n"
                "t:\n  ret i64 %b\n"
                "u:\n  %r = add i64 %w, 1\n  ret i64 %r\n}")
    check_module(mod)
    g = build(mod)
    in_gamma = _inside("gamma")
    assert _ops(g, "mul", in_gamma) == []
    pll.run(g)
    dne.run(g)
    assert len(_ops(g, "mul", in_gamma)) == 1
    assert len(_ops(g, "mul")) == 1
    _checked(mod, g, "pull")


# -- ILN --------------------------------------------------------------------

def test_iln_inlines_small_callees():
    """[DERIVED] poly calls sq and twice; after inlining no apply node
    remains and behavior is unchanged."""
    mod = load_corpus("inline_target.ir")
    g = build(mod)
    assert len(_ops(g, "apply")) >= 2
    iln.run(g)
    dne.run(g)
    assert _ops(g, "apply") == []
    _checked(mod, g, "inline_target.ir")


def test_iln_leaves_recursive_functions_alone():
    """[TRIVIAL] Calls into a recursion environment are not inlined."""
    mod = load_corpus("mutual.ir")
    g = build(mod)
    n_apply = len(_ops(g, "apply"))
    iln.run(g)
    # the recursive calls inside the environment must all survive
    assert len(_ops(g, "apply", _inside("phi"))) >= 2
    _checked(mod, g, "mutual.ir")


# -- URL --------------------------------------------------------------------

def test_url_factor_one_is_identity():
    """[TRIVIAL] Unrolling by one changes nothing, byte for byte."""
    g = build(load_corpus("counted17.ir"))
    before = dump(g)
    url.run(g, factor=1)
    assert dump(g) == before


def test_url_preserves_trip_counts():
    """[DERIVED] The counted loop agrees with its unrolled versions on
    every trip count from 0 to 17."""
    mod = load_corpus("counted17.ir")
    from conftest import outcome_cfg, outcome_rvsdg
    for factor in (2, 4):
        g = build(mod)
        url.run(g, factor=factor)
        assert g.validate() == []
        for n in range(18):
            assert (outcome_rvsdg(g, "count", [n])
                    == outcome_cfg(mod, "count", [n]))


# -- IVT --------------------------------------------------------------------

def test_ivt_turns_the_loop_inside_out():
    """[DERIVED] gcd's while loop is a theta around a gamma; inversion
    produces a gamma owning a theta, preserving behavior."""
    mod = load_corpus("gcd.ir")
    g = build(mod)

    def shape(graph):
        for n in graph.all_nodes():
            if n.kind == "theta":
                owner = n.region.owner
                yield ("theta-under-gamma" if owner is not None
                       and owner.kind == "gamma" else "theta-bare")

    assert "theta-under-gamma" not in set(shape(g))
    ivt.run(g)
    dne.run(g)
    assert "theta-under-gamma" in set(shape(g))
    _checked(mod, g, "gcd.ir")


# -- pipeline ---------------------------------------------------------------

def test_default_order_runs_every_pass():
    """[TRIVIAL] The default schedule mentions all nine passes."""
    assert set(DEFAULT_ORDER.split()) == set(PASSES)


def test_parse_passes_rejects_unknown_names():
    """[TRIVIAL]"""
    with pytest.raises(PassError):
        parse_passes("DNE NOPE")
    assert parse_passes("dne cne") == ["DNE", "CNE"]


def test_pipeline_reports_per_step_stats():
    """[TRIVIAL] One (name, before, after) triple per scheduled pass,
    rendered as stable key=value lines."""
    g = build(load_corpus("mul_chain.ir"))
    steps = run_pipeline(g, PassConfig(passes=["CNE", "DNE"]))
    assert [s[0] for s in steps] == ["CNE", "DNE"]
    text = format_stats(steps)
    assert "step00.pass=CNE" in text
    assert "step01.nodes_after=%d" % node_count(g) in text


def test_full_pipeline_preserves_behavior_on_tricky_fixtures():
    """[DERIVED] The default schedule keeps the oracle happy on the
    fixtures that exercise every structural feature at once."""
    for fixture in ("loop_motion.ir", "nested_loops.ir", "externals.ir",
                    "endless.ir", "mutual.ir"):
        mod = load_corpus(fixture)
        g = build(mod)
        run_pipeline(g, PassConfig(unroll_factor=2))
        _checked(mod, g, fixture)
