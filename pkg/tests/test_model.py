"""Model assembly: variable universe, constraint emission, size accounting."""

import pytest

import wsnsched as w
from wsnsched.model import KIND_ORDER
from helpers import make_instance, trivial_instance


def expected_counts(inst, arcs):
    """Size formulas recomputed from the index ranges alone.

    Kept deliberately formula-shaped (degree sums, no constraint assembly)
    so that it can disagree with build_model if either is wrong.
    """
    n = len(inst.sensors)
    T = inst.periods
    G = len(inst.phenomena)
    cov = {g: list(arcs.coverage[g]) for g in range(G)}
    comm_pairs = set(arcs.comm)
    indeg = {j: 0 for j in range(n)}
    outdeg = {i: 0 for i in range(n)}
    for (i, j) in arcs.comm:
        indeg[j] += 1
        outdeg[i] += 1
    for (i, _k) in arcs.to_sink:
        outdeg[i] += 1
    sources = {g: sorted({i for i, _ in cov[g]}) for g in range(G)}
    total_arcs = len(arcs.comm) + len(arcs.to_sink)

    n_x = T * sum(len(cov[g]) for g in range(G))
    n_z = T * sum(total_arcs - indeg[l] for g in range(G) for l in sources[g])
    n_h = T * sum(len(inst.demand_indices(g)) for g in range(G))
    variables = {
        "x": n_x, "y": n * T, "z": n_z, "w": n * T,
        "r": n * T * G, "h": n_h, "e": n,
    }

    c5 = 0
    for g in range(G):
        for l in sources[g]:
            for j in range(n):
                if j == l:
                    continue
                out_excl = outdeg[j] - (1 if (j, l) in comm_pairs else 0)
                if indeg[j] > 0 or out_excl > 0:
                    c5 += T
    constraints = {
        "C2": n_h,
        "C3": n_x,
        "C4": n * T * G,
        "C5": c5,
        "C6": n * T * G,
        "C7": n_z,
        "C8": T * sum(len(arcs.comm) - indeg[l] for g in range(G) for l in sources[g]),
        "C9": n,
        "C11": n,
        "C12": n * (T - 1),
    }
    objective_terms = n + n_h + (n * T * G if inst.penalty_activation != 0.0 else 0)
    return variables, constraints, objective_terms


def test_trivial_model_enumerable_by_hand():
    inst = trivial_instance()
    arcs = w.build_arcs(inst)
    model = w.build_model(inst, arcs)

    names = [ref.name for ref in model.variables]
    assert names == [
        "x_i0_j0_t0_g0", "y_i0_t0", "z_l0_i0_j1_t0_g0",
        "w_i0_t0", "r_i0_t0_g0", "h_j0_t0_g0", "e_i0",
    ]

    by_tag = {c.tag: c for c in model.constraints}
    assert sorted(by_tag) == [
        "C11_i0", "C2_j0_t0_g0", "C3_i0_j0_t0_g0", "C4_i0_t0_g0",
        "C6_l0_t0_g0", "C7_l0_i0_j1_t0_g0", "C9_i0",
    ]

    c2 = by_tag["C2_j0_t0_g0"]
    assert [(ref.name, coef) for ref, coef in c2.terms] == [
        ("x_i0_j0_t0_g0", 1.0), ("h_j0_t0_g0", 1.0)]
    assert (c2.sense, c2.rhs) == (">=", 1.0)

    c9 = by_tag["C9_i0"]
    coefs = {ref.name: coef for ref, coef in c9.terms}
    assert coefs["y_i0_t0"] == 0.5
    assert coefs["w_i0_t0"] == 0.25
    assert coefs["z_l0_i0_j1_t0_g0"] == pytest.approx(0.48, rel=1e-12)
    assert coefs["e_i0"] == -1.0
    assert (c9.sense, c9.rhs) == ("<=", 0.0)

    assert model.bounds == ((w.VarRef("e", (0,)), 0.0, 4.0),)
    obj = {ref.name: coef for ref, coef in model.objective}
    assert obj["e_i0"] == 1.0
    assert obj["h_j0_t0_g0"] == inst.penalty_uncovered
    assert obj["r_i0_t0_g0"] == 0.01


def test_uncoverable_point_degenerates_to_penalty_row():
    inst = make_instance(
        sensors=[(0.0, 0.0)], demand_points=[(9.0, 9.0)], sinks=[(1.0, 1.0)],
        radii=(2.0,), comm_radius=4.0)
    model = w.build_model(inst, w.build_arcs(inst))
    c2 = next(c for c in model.constraints if c.tag.startswith("C2"))
    assert [(ref.kind, coef) for ref, coef in c2.terms] == [("h", 1.0)]
    assert (c2.sense, c2.rhs) == (">=", 1.0)


def test_c6_pins_r_for_noncovering_sensors():
    # Sensor 1 covers nothing, so its outflow row has only the -r term.
    inst = make_instance(
        sensors=[(5.0, 5.0), (9.0, 9.0)], demand_points=[(5.0, 6.0)],
        sinks=[(5.0, 3.0)], radii=(2.0,), comm_radius=20.0)
    model = w.build_model(inst, w.build_arcs(inst))
    row = next(c for c in model.constraints if c.tag == "C6_l1_t0_g0")
    assert [(ref.name, coef) for ref, coef in row.terms] == [("r_i1_t0_g0", -1.0)]
    assert (row.sense, row.rhs) == ("=", 0.0)


def test_relay_chain_balance_row():
    # 0 -> 1 -> sink chain; conservation at 1 for streams born at 0.
    inst = make_instance(
        sensors=[(1.0, 5.0), (4.0, 5.0)], demand_points=[(1.0, 6.0)],
        sinks=[(7.0, 5.0)], radii=(2.0,), comm_radius=3.0)
    model = w.build_model(inst, w.build_arcs(inst))
    row = next(c for c in model.constraints if c.tag == "C5_l0_j1_t0_g0")
    assert [(ref.name, coef) for ref, coef in row.terms] == [
        ("z_l0_i0_j1_t0_g0", 1.0), ("z_l0_i1_j2_t0_g0", -1.0)]
    assert (row.sense, row.rhs) == ("=", 0.0)


@pytest.mark.parametrize("name,kind,periods,seed", [
    ("bench1", "grid", 1, 0),
    ("bench1", "grid", 3, 0),
    ("bench2", "grid", 2, 0),
    ("default", "random", 2, 5),
    ("default", "random", 1, 13),
])
def test_counting_oracle(name, kind, periods, seed):
    inst = w.scenario_instance(name, kind=kind, periods=periods, seed=seed)
    arcs = w.build_arcs(inst)
    model = w.build_model(inst, arcs)
    stats = w.model_stats(model)
    variables, constraints, objective_terms = expected_counts(inst, arcs)

    for k, count in variables.items():
        assert stats["variables"][k] == count, k
    assert stats["variables"]["total"] == sum(variables.values())
    assert stats["variables"]["binary"] == sum(
        v for k, v in variables.items() if k != "e")
    for fam, count in constraints.items():
        assert stats["constraints"].get(fam, 0) == count, fam
    assert stats["constraints"]["total"] == sum(constraints.values())
    assert stats["objective_terms"] == objective_terms


def test_counting_oracle_partial_demands():
    inst = make_instance(
        sensors=[(2.0, 2.0), (5.0, 5.0), (8.0, 8.0)],
        demand_points=[((2.0, 3.0), (0,)), ((5.0, 6.0), (0, 1)), ((8.0, 7.0), (1,))],
        sinks=[(5.0, 2.0)], radii=(2.0, 3.0), periods=2, comm_radius=5.0,
        penalty_activation=0.0)
    arcs = w.build_arcs(inst)
    stats = w.model_stats(w.build_model(inst, arcs))
    variables, constraints, objective_terms = expected_counts(inst, arcs)
    assert stats["variables"]["h"] == variables["h"] == 2 * 4
    assert stats["constraints"]["C2"] == constraints["C2"]
    # penalty_activation == 0 drops the r terms from the objective.
    assert stats["objective_terms"] == objective_terms == 3 + 8


def test_every_referenced_variable_is_declared():
    inst = w.scenario_instance("default", kind="random", periods=2, seed=21)
    arcs = w.build_arcs(inst)
    model = w.build_model(inst, arcs)
    declared = set(model.variables)
    for c in model.constraints:
        for ref, _ in c.terms:
            assert ref in declared
    for ref, _ in model.objective:
        assert ref in declared
    for ref, lo, hi in model.bounds:
        assert ref in declared
        assert (lo, hi) == (0.0, inst.device.battery_capacity)


def test_variable_order_is_canonical():
    inst = w.scenario_instance("default", kind="random", periods=2, seed=8)
    arcs = w.build_arcs(inst)
    model = w.build_model(inst, arcs)
    assert model.variables == w.variable_universe(inst, arcs)
    keys = [ref.sort_key() for ref in model.variables]
    assert keys == sorted(keys)
    kinds = [ref.kind for ref in model.variables]
    assert kinds == sorted(kinds, key=KIND_ORDER.index)


def test_z_never_points_back_into_source():
    inst = w.scenario_instance("default", kind="random", periods=1, seed=30)
    model = w.build_model(inst, w.build_arcs(inst))
    for ref in model.variables:
        if ref.kind == "z":
            l, _i, j, _t, _g = ref.indices
            assert j != l


def test_per_phenomenon_fixed_energy_flag():
    inst = make_instance(
        sensors=[(5.0, 5.0)], demand_points=[(5.0, 6.0)], sinks=[(5.0, 3.0)],
        radii=(2.0, 3.0))
    arcs = w.build_arcs(inst)
    default = w.build_model(inst, arcs)
    variant = w.build_model(inst, arcs, per_phenomenon_fixed_energy=True)

    def c9_coefs(model):
        row = next(c for c in model.constraints if c.tag == "C9_i0")
        return {ref.name: coef for ref, coef in row.terms}

    assert c9_coefs(default)["y_i0_t0"] == 0.5
    assert c9_coefs(default)["w_i0_t0"] == 0.25
    assert c9_coefs(variant)["y_i0_t0"] == 1.0
    assert c9_coefs(variant)["w_i0_t0"] == 0.5


def test_mismatched_arcs_rejected():
    a = w.scenario_instance("default", kind="random", periods=1, seed=1)
    b = w.scenario_instance("default", kind="random", periods=1, seed=2)
    arcs_b = w.build_arcs(b)
    with pytest.raises(ValueError):
        w.build_model(a, arcs_b)
    with pytest.raises(ValueError):
        w.variable_universe(a, arcs_b)


def test_parse_var_name_roundtrip():
    inst = w.scenario_instance("default", kind="random", periods=2, seed=3)
    model = w.build_model(inst, w.build_arcs(inst))
    for ref in model.variables:
        assert w.parse_var_name(ref.name) == ref
    for bad in ("x_i0_j0", "q_i0", "e_j0", "x_i0_j0_t0_gx", "y_t0_i0", "", "e"):
        with pytest.raises(ValueError):
            w.parse_var_name(bad)
