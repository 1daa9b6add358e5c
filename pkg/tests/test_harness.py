import math

import pytest

from yamabe_lab import geometry as geo
from yamabe_lab import harness as hn
from yamabe_lab.solver import SolverOptions

FAST = hn.HarnessOptions(solver=SolverOptions(mesh_nodes=129), sphere_nodes=257)


def test_verdict_logic():
    ok = hn.make_report("x", 2.0, 1.0, hn.GE, "anchor")
    assert ok.verdict == hn.PASS and ok.margin == 1.0
    within = hn.make_report("x", 0.995, 1.0, hn.GE, "anchor")
    assert within.verdict == hn.PASS  # inside the 1% default tolerance
    bad = hn.make_report("x", 0.98, 1.0, hn.GE, "anchor")
    assert bad.verdict == hn.FAIL
    le = hn.make_report("x", 3.0, 1.0, hn.LE, "anchor", tolerance=0.0)
    assert le.verdict == hn.FAIL and le.margin == -2.0
    assert hn.make_report("x", 0.0, 1.0, hn.GE, "a", converged=False).verdict == hn.INCONCLUSIVE
    assert hn.make_report("x", math.nan, 1.0, hn.GE, "a").verdict == hn.INCONCLUSIVE
    with pytest.raises(ValueError):
        hn.make_report("x", 1.0, 1.0, "==", "a")


def test_default_tolerance():
    assert hn.default_tolerance(1e-9, 0.0) == 1e-6
    assert hn.default_tolerance(100.0, 50.0) == pytest.approx(1.0)
    assert hn.default_tolerance(math.inf, 1.0) == 1e-6


def test_report_json_drops_runtime():
    r = hn.make_report("x", 1.0, 1.0, hn.GE, "anchor", {"model": "m"})
    r.runtime_ms = 12.0
    d = r.to_json()
    assert "runtime_ms" not in d
    assert d["metadata"] == {"model": "m"}


def test_overall_status():
    good = hn.make_report("x", 1.0, 1.0, hn.GE, "a")
    bad = hn.make_report("x", 0.0, 1.0, hn.GE, "a")
    assert hn.overall_status([good]) == 0
    assert hn.overall_status([good, bad]) == 2
    assert hn.overall_status([]) == 2


def test_reflection_check_passes():
    reports = hn.check_reflection(3, FAST)
    assert reports and all(r.verdict == hn.PASS for r in reports), [(r.name, r.margin) for r in reports]
    assert all(r.anchor for r in reports)


def test_cut_lemma_margin_is_strictly_positive():
    (r,) = hn.check_cut_lemma(3, 1.0, FAST)[:1]
    assert r.verdict == hn.PASS
    assert r.margin > 0.3 * r.rhs


def test_covering_check_passes():
    reports = hn.check_covering(3, 1.0, 10.0, FAST)
    assert all(r.verdict == hn.PASS for r in reports), [(r.name, r.margin) for r in reports]
    assert {r.metadata["lambda"] for r in reports} == {1.0}


def test_checks_are_deterministic():
    first = [r.to_json() for r in hn.check_cut_lemma(3, 0.5, FAST)]
    hn.estimate.cache_clear()
    second = [r.to_json() for r in hn.check_cut_lemma(3, 0.5, FAST)]
    assert first == second


def test_reports_carry_reproduction_metadata():
    for r in hn.check_covering(3, 0.5, 5.0, FAST):
        for key in ("model", "n", "lambda", "a", "b", "mesh"):
            assert key in r.metadata, (r.name, key)


def test_constant_regime_length():
    assert hn.constant_regime_length(3) == pytest.approx(2 * math.pi)
    assert hn.constant_regime_length(6) == pytest.approx(math.pi)


def test_unknown_suite():
    with pytest.raises(ValueError):
        hn.run_suite("bogus", 3, FAST)


def test_suite_order_does_not_depend_on_workers():
    serial = [r.to_json() for r in hn.run_suite("cut", 3, FAST, workers=1)]
    parallel = [r.to_json() for r in hn.run_suite("cut", 3, FAST, workers=2)]
    assert serial == parallel


def test_escobar_report_sets_normalization_audit():
    reports = hn.check_escobar_proportionality(3, (0.5, 1.0), FAST)
    assert all(r.metadata.get("normalization_audit") for r in reports)


def test_boundary_models_are_hemi():
    m = geo.hemi_capsule(3, 5.0)
    assert m.lateral_boundary and m.neck is not None


def test_proportionality_constant_is_minimax():
    vals, ref = [2.0, 3.0, 4.0], [1.0, 1.0, 1.0]
    k = hn.proportionality_constant(vals, ref)
    resid = [abs(v - k * r) / v for v, r in zip(vals, ref)]
    assert resid[0] == pytest.approx(resid[2])
    assert hn.proportionality_constant([6.0, 9.0], [2.0, 3.0]) == pytest.approx(3.0)
