"""Exact search, enumeration oracle, heuristic, and solution files."""

import math

import pytest

import wsnsched as w
from wsnsched.solve import OracleCapExceeded, parse_external_solution
from helpers import (
    make_instance,
    tiny_instance,
    trivial_instance,
    values_by_kind,
    assert_routes_reach_sinks,
)


def test_trivial_optimum_all_three_solvers():
    inst = trivial_instance()
    arcs = w.build_arcs(inst)

    exact, certificate = w.solve_exact(inst, arcs)
    assert certificate
    oracle = w.brute_force_oracle(inst, arcs)
    heuristic = w.solve_heuristic(inst, arcs)

    # EM + EA + ET = 1.23 energy, plus EG for the one sensing period.
    for sol in (exact, oracle, heuristic):
        assert w.check_feasibility(inst, arcs, sol) == []
        metrics = w.evaluate(inst, sol, arcs)
        assert metrics.objective == pytest.approx(1.24, rel=1e-12)
        assert sol.values[w.VarRef("e", (0,))] == pytest.approx(1.23, rel=1e-12)
        assert sol.values[w.VarRef("x", (0, 0, 0, 0))] == 1.0
        assert sol.values[w.VarRef("z", (0, 0, 1, 0, 0))] == 1.0
        assert sol.objective == pytest.approx(metrics.objective, rel=1e-12)
    assert exact.provenance == "exact"
    assert oracle.provenance == "oracle"
    assert heuristic.provenance == "heuristic"
    assert exact.wall_time_s >= 0.0


def test_relay_chain_optimum():
    # Coverage at sensor 0, sink reachable only through sensor 1:
    # e0 = EM+EA+ET = 1.23, e1 = EM+EA+ER+ET = 1.47, objective 2.70 + EG.
    inst = make_instance(
        sensors=[(1.0, 5.0), (4.0, 5.0)], demand_points=[(1.0, 6.0)],
        sinks=[(7.0, 5.0)], radii=(2.0,), comm_radius=3.0)
    arcs = w.build_arcs(inst)
    exact, certificate = w.solve_exact(inst, arcs)
    assert certificate
    metrics = w.evaluate(inst, exact, arcs)
    assert metrics.objective == pytest.approx(2.71, rel=1e-12)
    assert exact.values[w.VarRef("z", (0, 0, 1, 0, 0))] == 1.0
    assert exact.values[w.VarRef("z", (0, 1, 2, 0, 0))] == 1.0
    assert exact.values[w.VarRef("y", (1, 0))] == 1.0
    assert exact.values[w.VarRef("e", (1,))] == pytest.approx(1.47, rel=1e-12)

    oracle = w.brute_force_oracle(inst, arcs)
    heuristic = w.solve_heuristic(inst, arcs)
    assert w.evaluate(inst, oracle, arcs).objective == pytest.approx(2.71, rel=1e-12)
    assert w.evaluate(inst, heuristic, arcs).objective == pytest.approx(2.71, rel=1e-12)


def test_exact_matches_oracle_on_tiny_instances():
    for seed in range(12):
        inst, arcs = tiny_instance(seed)
        exact, certificate = w.solve_exact(inst, arcs)
        assert certificate, f"seed {seed} hit limits"
        oracle = w.brute_force_oracle(inst, arcs)
        me = w.evaluate(inst, exact, arcs).objective
        mo = w.evaluate(inst, oracle, arcs).objective
        assert me == pytest.approx(mo, rel=1e-9), f"seed {seed}"


def test_oracle_breaks_ties_lexicographically():
    # Perfectly symmetric twins; the lexicographically first optimal
    # assignment zeroes the earliest variables, so sensor 1 does the work.
    inst = make_instance(
        sensors=[(4.0, 5.0), (6.0, 5.0)], demand_points=[(5.0, 5.0)],
        sinks=[(5.0, 5.0)], radii=(1.0,), comm_radius=2.0)
    arcs = w.build_arcs(inst)
    oracle = w.brute_force_oracle(inst, arcs)
    rs = values_by_kind(oracle, "r")
    assert rs[(0, 0, 0)] == 0.0
    assert rs[(1, 0, 0)] == 1.0
    exact, certificate = w.solve_exact(inst, arcs)
    assert certificate
    assert w.evaluate(inst, exact, arcs).objective == pytest.approx(
        w.evaluate(inst, oracle, arcs).objective, rel=1e-12)


def test_unroutable_coverage_forces_penalty():
    # The sensor covers the point but cannot reach any sink.
    inst = make_instance(
        sensors=[(1.0, 5.0)], demand_points=[(1.0, 6.0)], sinks=[(9.0, 5.0)],
        radii=(2.0,), comm_radius=3.0)
    arcs = w.build_arcs(inst)
    for sol in (w.solve_exact(inst, arcs)[0], w.brute_force_oracle(inst, arcs),
                w.solve_heuristic(inst, arcs)):
        metrics = w.evaluate(inst, sol, arcs)
        assert metrics.objective == pytest.approx(inst.penalty_uncovered, rel=1e-12)
        assert metrics.real_objective == 0.0
        assert metrics.uncovered_rate == 1.0


def test_zero_battery_forces_all_penalty():
    inst = trivial_instance(battery=0.0, periods=2)
    arcs = w.build_arcs(inst)
    for sol in (w.solve_exact(inst, arcs)[0], w.brute_force_oracle(inst, arcs),
                w.solve_heuristic(inst, arcs)):
        assert w.check_feasibility(inst, arcs, sol) == []
        metrics = w.evaluate(inst, sol, arcs)
        assert metrics.objective == pytest.approx(2 * inst.penalty_uncovered, rel=1e-12)
        assert all(val == 0.0 for ref, val in sol.values.items() if ref.kind == "y")


def test_small_battery_limits_sensing_periods():
    # Two periods cost 2.21 > 1.3; the optimum covers exactly one period.
    inst = trivial_instance(battery=1.3, periods=2)
    arcs = w.build_arcs(inst)
    exact, certificate = w.solve_exact(inst, arcs)
    assert certificate
    oracle = w.brute_force_oracle(inst, arcs)
    expect = inst.penalty_uncovered + 1.24
    for sol in (exact, oracle):
        metrics = w.evaluate(inst, sol, arcs)
        assert metrics.objective == pytest.approx(expect, rel=1e-12)
        assert sum(values_by_kind(sol, "r").values()) == 1.0
    heuristic = w.solve_heuristic(inst, arcs)
    assert w.check_feasibility(inst, arcs, heuristic) == []
    assert w.evaluate(inst, heuristic, arcs).objective == pytest.approx(
        expect, rel=1e-12)


def test_node_limit_drops_certificate_but_stays_feasible():
    inst, arcs = tiny_instance(3)
    solution, certificate = w.solve_exact(
        inst, arcs, config=w.SolveConfig(node_limit=1))
    assert not certificate
    assert w.check_feasibility(inst, arcs, solution) == []


def test_time_limit_on_large_instance():
    inst = w.scenario_instance("bench1", kind="grid", periods=2)
    arcs = w.build_arcs(inst)
    solution, certificate = w.solve_exact(
        inst, arcs, config=w.SolveConfig(time_limit_s=0.2))
    assert not certificate
    assert w.check_feasibility(inst, arcs, solution) == []


def test_nonzero_gap_never_certifies():
    inst = trivial_instance()
    arcs = w.build_arcs(inst)
    solution, certificate = w.solve_exact(
        inst, arcs, config=w.SolveConfig(gap=0.5))
    assert not certificate
    assert w.check_feasibility(inst, arcs, solution) == []


def test_solvers_are_deterministic():
    inst, arcs = tiny_instance(7)
    assert w.solve_exact(inst, arcs)[0].values == w.solve_exact(inst, arcs)[0].values
    assert (w.brute_force_oracle(inst, arcs).values
            == w.brute_force_oracle(inst, arcs).values)
    assert (w.solve_heuristic(inst, arcs).values
            == w.solve_heuristic(inst, arcs).values)


def test_heuristic_never_beats_exact():
    worse = 0
    for seed in range(10):
        inst, arcs = tiny_instance(seed + 100)
        exact, certificate = w.solve_exact(inst, arcs)
        assert certificate
        opt = w.evaluate(inst, exact, arcs).objective
        heur = w.evaluate(inst, w.solve_heuristic(inst, arcs), arcs).objective
        assert heur >= opt - 1e-9
        if heur > 2 * opt + 1e-9:
            worse += 1
    assert worse <= 1  # the greedy may lose badly only rarely


def test_heuristic_routes_reach_sinks_multi_sink():
    inst = w.scenario_instance("bench2", kind="grid", periods=2)
    arcs = w.build_arcs(inst)
    solution = w.solve_heuristic(inst, arcs)
    assert w.check_feasibility(inst, arcs, solution) == []
    assert_routes_reach_sinks(inst, arcs, solution)


def test_oracle_cap_is_enforced():
    inst = w.scenario_instance("bench1", kind="grid", periods=1)
    arcs = w.build_arcs(inst)
    with pytest.raises(OracleCapExceeded):
        w.brute_force_oracle(inst, arcs)
    small, small_arcs = tiny_instance(2)
    with pytest.raises(OracleCapExceeded):
        w.brute_force_oracle(small, small_arcs, cap=1)


def test_solution_json_roundtrip(tmp_path):
    inst, arcs = tiny_instance(5)
    solution, _ = w.solve_exact(inst, arcs)
    path = tmp_path / "sol.json"
    w.save_solution(solution, path)
    back = w.load_solution(path, inst, arcs)
    assert back.values == solution.values
    assert back.provenance == solution.provenance
    assert back.objective == pytest.approx(solution.objective, rel=1e-12)
    # The file stores only nonzeros; loading fills the rest with zeros.
    zeros = [ref for ref, val in back.values.items() if val == 0.0]
    assert zeros


def test_load_solution_rejects_unknown_names(tmp_path):
    inst, arcs = tiny_instance(5)
    solution, _ = w.solve_exact(inst, arcs)
    path = tmp_path / "sol.json"
    w.save_solution(solution, path)
    import json
    doc = json.loads(path.read_text())
    doc["values"]["y_i999_t0"] = 1.0
    path.write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        w.load_solution(path, inst, arcs)


def test_external_solution_import(tmp_path):
    inst = trivial_instance()
    arcs = w.build_arcs(inst)
    solution, _ = w.solve_exact(inst, arcs)
    lines = ["# external solver dump"]
    for ref, val in solution.values.items():
        noisy = val
        if ref.kind != "e" and val == 1.0:
            noisy = 0.9999995  # within snapping tolerance
        lines.append(f"{ref.name} = {noisy}")
    path = tmp_path / "ext.sol"
    path.write_text("\n".join(lines) + "\n")
    ext = w.load_external_solution(path, inst, arcs)
    assert ext.provenance == "external"
    assert ext.values == solution.values
    assert w.check_feasibility(inst, arcs, ext) == []

    with pytest.raises(ValueError):
        parse_external_solution("nonsense without equals\n")
    with pytest.raises(ValueError):
        parse_external_solution("q_i0 = 1\n")


def test_exact_respects_battery_in_routing():
    # The relay's battery cannot carry both periods of traffic; the exact
    # solver must drop one period rather than overdraw sensor 1.
    # Relay load per period: EM 0.5 + ER 0.24 + ET 0.48 = 1.22, activation
    # 0.25; two periods need 2.69 > 2.5.
    inst = make_instance(
        sensors=[(1.0, 5.0), (4.0, 5.0)], demand_points=[(1.0, 6.0)],
        sinks=[(7.0, 5.0)], radii=(2.0,), comm_radius=3.0,
        battery=2.5, periods=2)
    arcs = w.build_arcs(inst)
    exact, certificate = w.solve_exact(inst, arcs)
    assert certificate
    metrics = w.evaluate(inst, exact, arcs)
    assert metrics.objective == pytest.approx(inst.penalty_uncovered + 2.71, rel=1e-12)
    oracle = w.brute_force_oracle(inst, arcs)
    assert w.evaluate(inst, oracle, arcs).objective == pytest.approx(
        metrics.objective, rel=1e-12)
    for i in range(2):
        assert exact.values[w.VarRef("e", (i,))] <= inst.device.battery_capacity + 1e-9


def test_wall_time_is_recorded():
    inst, arcs = tiny_instance(1)
    for sol in (w.solve_exact(inst, arcs)[0], w.brute_force_oracle(inst, arcs),
                w.solve_heuristic(inst, arcs)):
        assert sol.wall_time_s >= 0.0
        assert math.isfinite(sol.wall_time_s)
