"""Command line driver tests.

Exit codes and output formats are contractual: 0 success, 1 bad input,
2 equivalence failure, 3 broken internal invariant.  All oracles here
are [TRIVIAL] (documented contract) or [DERIVED] (hand-computed
expectations on committed fixtures).
"""

import io

import pytest

from regionir import cli
from regionir.graph import GraphError

from conftest import corpus_path


def run_cli(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out=out)
    return code, out.getvalue()


def test_check_reports_counts():
    """[TRIVIAL]"""
    code, text = run_cli("check", corpus_path("max_puts.ir"))
    assert code == 0
    assert "2 functions" in text and "1 externals" in text


def test_check_rejects_garbage(tmp_path):
    """[TRIVIAL] Unparseable input exits 1."""
    p = tmp_path / "bad.ir"
    p.write_text("define i64 @f(")
    code, _ = run_cli("check", str(p))
    assert code == 1


def test_missing_file_exits_one():
    """[TRIVIAL]"""
    code, _ = run_cli("check", "no/such/file.ir")
    assert code == 1


def test_run_compares_both_levels():
    """[DERIVED] gcd(48,18)=6, printed once when both levels agree."""
    code, text = run_cli("run", corpus_path("gcd.ir"), "--args", "48,18")
    assert code == 0
    assert "ret=6" in text


def test_run_detects_divergence(monkeypatch):
    """[TRIVIAL] A disagreement between the levels exits 2."""
    real = cli.eval_rvsdg
    monkeypatch.setattr(cli, "eval_rvsdg",
                        lambda *a, **k: ([None], []))
    code, _ = run_cli("run", corpus_path("gcd.ir"), "--args", "48,18")
    assert code == 2
    monkeypatch.setattr(cli, "eval_rvsdg", real)


def test_internal_invariant_breakage_exits_three(monkeypatch):
    """[TRIVIAL] A pass that corrupts the graph is reported as an
    internal error, not as a user mistake."""
    def boom(graph):
        raise GraphError("synthetic breakage")
    monkeypatch.setitem(cli.run_pipeline.__globals__["PASSES"], "DNE", boom)
    code, _ = run_cli("opt", corpus_path("gcd.ir"), "--passes", "DNE")
    assert code == 3


def test_opt_then_stats_shows_the_merged_multiplication(tmp_path):
    """[DERIVED] CNE+DNE merges one of four multiplications: stats on
    the optimized output reports op.mul=3 where the input had 4."""
    code, before = run_cli("stats", corpus_path("mul_chain.ir"))
    assert code == 0 and "op.mul=4" in before
    code, text = run_cli("opt", corpus_path("mul_chain.ir"),
                         "--passes", "CNE,DNE")
    assert code == 0
    p = tmp_path / "opt.ir"
    p.write_text(text)
    code, after = run_cli("stats", str(p))
    assert code == 0 and "op.mul=3" in after


def test_stats_reports_dead_nodes():
    """[DERIVED] The committed dead-code fixture has exactly two dead
    nodes before cleanup."""
    code, text = run_cli("stats", corpus_path("deadcode.ir"))
    assert code == 0
    assert "dead=2" in text
    code, text = run_cli("stats", corpus_path("deadcode.ir"),
                         "--passes", "DNE")
    assert code == 0
    assert "dead=0" in text


def test_roundtrip_command_samples_random_inputs():
    """[TRIVIAL]"""
    code, text = run_cli("roundtrip", corpus_path("popcount.ir"),
                         "--samples", "20")
    assert code == 0
    assert "@popcount: 20 samples ok" in text


def test_construct_and_dot_are_deterministic():
    """[DERIVED] Two invocations produce byte-identical dumps, DOT at
    every level, and stats."""
    for argv in (("construct", corpus_path("nested_loops.ir")),
                 ("dot", corpus_path("nested_loops.ir")),
                 ("dot", corpus_path("nested_loops.ir"), "--level", "cfg"),
                 ("dot", corpus_path("nested_loops.ir"), "--level", "tree"),
                 ("stats", corpus_path("nested_loops.ir"))):
        a = run_cli(*argv)
        b = run_cli(*argv)
        assert a == b and a[0] == 0


def test_dot_emits_graphviz():
    """[TRIVIAL]"""
    code, text = run_cli("dot", corpus_path("gcd.ir"))
    assert code == 0
    assert text.startswith("digraph") and "subgraph" in text


def test_run_requires_fn_when_ambiguous():
    """[TRIVIAL] Several exports and no --fn is a usage error."""
    code, _ = run_cli("run", corpus_path("indirect_calls.ir"),
                      "--fn", "nothere", "--args", "1")
    assert code == 1


def test_fuel_flag_limits_execution():
    """[TRIVIAL] The endless fixture traps identically on both levels
    under a small fuel bound, which counts as agreement."""
    code, text = run_cli("run", corpus_path("endless.ir"),
                         "--args", "1", "--fuel", "3000")
    assert code == 0
    assert "trap: fuel" in text
