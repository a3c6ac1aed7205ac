"""Independent feasibility checking and solution metrics.

This module re-derives every constraint family directly from the instance
and its arc sets rather than reading them out of a built model, so model
construction bugs and solver bugs cannot cancel each other out.  Binary
rows are checked exactly; only the energy accounting row and the battery
bounds use a small absolute tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import ArcSets, EnergyTables, Instance, build_arcs
from .model import VarRef

ENERGY_TOL = 1e-6


class SolutionIndexError(Exception):
    """The solution's variables do not match the instance at all."""


class InfeasibleSolutionError(Exception):
    """Raised by :func:`evaluate` when the solution violates a constraint."""

    def __init__(self, violations):
        super().__init__(f"solution violates {len(violations)} constraint(s), "
                         f"first: {violations[0].tag}")
        self.violations = violations


@dataclass(frozen=True)
class Violation:
    """One violated constraint row: ``lhs sense rhs`` does not hold.

    ``sense`` is ``<=``, ``>=``, ``=`` or ``bin`` (a binary variable took a
    fractional value; ``lhs`` is that value).
    """

    tag: str
    lhs: float
    sense: str
    rhs: float

    @property
    def slack(self) -> float:
        if self.sense == "<=":
            return self.rhs - self.lhs
        if self.sense == ">=":
            return self.lhs - self.rhs
        if self.sense == "=":
            return -abs(self.lhs - self.rhs)
        return -min(abs(self.lhs), abs(self.lhs - 1.0))

    def to_json(self) -> dict:
        return {"tag": self.tag, "lhs": self.lhs, "sense": self.sense,
                "rhs": self.rhs, "slack": self.slack}


@dataclass(frozen=True)
class Metrics:
    """Evaluation of a feasible solution."""

    objective: float
    real_objective: float
    penalty_total: float
    uncovered_rate: float
    per_sensor_energy: tuple[float, ...]
    activations: int


def _values_of(solution) -> dict:
    # Accept either a Solution-like object or a bare {VarRef: value} dict.
    if isinstance(solution, dict):
        return solution
    return solution.values


def _required_variables(instance: Instance, arcs: ArcSets) -> list[VarRef]:
    """The variable universe, re-derived here from the arc sets alone."""
    n = len(instance.sensors)
    T = instance.periods
    G = len(instance.phenomena)
    refs: list[VarRef] = []
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            for t in range(T):
                refs.append(VarRef("x", (i, j, t, g)))
    for i in range(n):
        for t in range(T):
            refs.append(VarRef("y", (i, t)))
            refs.append(VarRef("w", (i, t)))
            for g in range(G):
                refs.append(VarRef("r", (i, t, g)))
        refs.append(VarRef("e", (i,)))
    stream_arcs = list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]
    for g in range(G):
        for l in sorted({i for i, _ in arcs.coverage[g]}):
            for (a, b) in stream_arcs:
                if b == l:
                    continue
                for t in range(T):
                    refs.append(VarRef("z", (l, a, b, t, g)))
    for g in range(G):
        for j in instance.demand_indices(g):
            for t in range(T):
                refs.append(VarRef("h", (j, t, g)))
    return refs


def check_feasibility(instance: Instance, arcs: ArcSets, solution) -> list[Violation]:
    """All violated constraint rows of a solution; empty means feasible.

    Raises :class:`SolutionIndexError` when the solution's variable set is
    not exactly the universe the instance implies (a missing or foreign
    variable is an indexing bug, not an infeasibility).
    """
    values = _values_of(solution)
    required = _required_variables(instance, arcs)
    required_set = set(required)
    for ref in required:
        if ref not in values:
            raise SolutionIndexError(f"solution is missing variable {ref.name}")
    for ref in values:
        if ref not in required_set:
            raise SolutionIndexError(f"solution has foreign variable {ref.name}")

    n = len(instance.sensors)
    T = instance.periods
    G = len(instance.phenomena)
    tables = EnergyTables(instance, arcs)
    v = values.__getitem__
    out: list[Violation] = []

    # C13: binaries take values in {0, 1}.
    for ref in required:
        if ref.kind != "e" and v(ref) not in (0.0, 1.0):
            out.append(Violation(f"C13_{ref.name}", float(v(ref)), "bin", 0.0))

    cover_of: dict[tuple[int, int], list[int]] = {}
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            cover_of.setdefault((j, g), []).append(i)

    # C2: demanded coverage or penalty.
    for g in range(G):
        for j in instance.demand_indices(g):
            for t in range(T):
                lhs = sum(v(VarRef("x", (i, j, t, g))) for i in cover_of.get((j, g), []))
                lhs += v(VarRef("h", (j, t, g)))
                if not lhs >= 1.0:
                    out.append(Violation(f"C2_j{j}_t{t}_g{g}", lhs, ">=", 1.0))

    # C3: covering requires sensing.
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            for t in range(T):
                lhs = v(VarRef("x", (i, j, t, g))) - v(VarRef("r", (i, t, g)))
                if not lhs <= 0.0:
                    out.append(Violation(f"C3_i{i}_j{j}_t{t}_g{g}", lhs, "<=", 0.0))

    # C4: sensing requires activity.
    for i in range(n):
        for t in range(T):
            for g in range(G):
                lhs = v(VarRef("r", (i, t, g))) - v(VarRef("y", (i, t)))
                if not lhs <= 0.0:
                    out.append(Violation(f"C4_i{i}_t{t}_g{g}", lhs, "<=", 0.0))

    stream_arcs = list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]
    in_s: dict[int, list[tuple[int, int]]] = {j: [] for j in range(n)}
    out_all: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    for (a, b) in arcs.comm:
        in_s[b].append((a, b))
    for (a, b) in stream_arcs:
        out_all[a].append((a, b))
    sources = {g: sorted({i for i, _ in arcs.coverage[g]}) for g in range(G)}

    # C5: stream conservation at non-source sensors (sinks absorb).
    for g in range(G):
        for l in sources[g]:
            for t in range(T):
                for j in range(n):
                    if j == l:
                        continue
                    terms = [(a, b) for (a, b) in in_s[j]]
                    outs = [(a, b) for (a, b) in out_all[j] if b != l]
                    if not terms and not outs:
                        continue
                    lhs = sum(v(VarRef("z", (l, a, b, t, g))) for (a, b) in terms)
                    lhs -= sum(v(VarRef("z", (l, a, b, t, g))) for (a, b) in outs)
                    if lhs != 0.0:
                        out.append(Violation(f"C5_l{l}_j{j}_t{t}_g{g}", lhs, "=", 0.0))

    # C6: stream leaves its source iff the source senses.
    for g in range(G):
        src = set(sources[g])
        for l in range(n):
            for t in range(T):
                lhs = 0.0
                if l in src:
                    lhs = sum(v(VarRef("z", (l, a, b, t, g)))
                              for (a, b) in out_all[l] if b != l)
                lhs -= v(VarRef("r", (l, t, g)))
                if lhs != 0.0:
                    out.append(Violation(f"C6_l{l}_t{t}_g{g}", lhs, "=", 0.0))

    # C7/C8: carrying arcs need active endpoints.
    for g in range(G):
        for l in sources[g]:
            for (a, b) in stream_arcs:
                if b == l:
                    continue
                for t in range(T):
                    zv = v(VarRef("z", (l, a, b, t, g)))
                    if zv - v(VarRef("y", (a, t))) > 0.0:
                        out.append(Violation(
                            f"C7_l{l}_i{a}_j{b}_t{t}_g{g}",
                            zv - v(VarRef("y", (a, t))), "<=", 0.0))
                    if b < n and zv - v(VarRef("y", (b, t))) > 0.0:
                        out.append(Violation(
                            f"C8_l{l}_i{a}_j{b}_t{t}_g{g}",
                            zv - v(VarRef("y", (b, t))), "<=", 0.0))

    # C9: drawn energy covers maintenance, activation and traffic.
    for i in range(n):
        lhs = 0.0
        for t in range(T):
            lhs += tables.em * v(VarRef("y", (i, t)))
            lhs += tables.ea * v(VarRef("w", (i, t)))
            for g in range(G):
                for (a, b) in in_s[i]:
                    for l in sources[g]:
                        if l == i:
                            continue
                        lhs += tables.er[g] * v(VarRef("z", (l, a, b, t, g)))
                for (a, b) in out_all[i]:
                    for l in sources[g]:
                        if l == b:
                            continue
                        lhs += tables.et[(a, b)][g] * v(VarRef("z", (l, a, b, t, g)))
        lhs -= v(VarRef("e", (i,)))
        if lhs > ENERGY_TOL:
            out.append(Violation(f"C9_i{i}", lhs, "<=", 0.0))

    # C10: battery bounds.
    for i in range(n):
        ei = v(VarRef("e", (i,)))
        if ei < -ENERGY_TOL:
            out.append(Violation(f"C10_i{i}", ei, ">=", 0.0))
        elif ei > tables.eb + ENERGY_TOL:
            out.append(Violation(f"C10_i{i}", ei, "<=", tables.eb))

    # C11/C12: off-to-on transitions are counted.
    for i in range(n):
        lhs = v(VarRef("w", (i, 0))) - v(VarRef("y", (i, 0)))
        if not lhs >= 0.0:
            out.append(Violation(f"C11_i{i}", lhs, ">=", 0.0))
        for t in range(1, T):
            lhs = (v(VarRef("w", (i, t))) - v(VarRef("y", (i, t)))
                   + v(VarRef("y", (i, t - 1))))
            if not lhs >= 0.0:
                out.append(Violation(f"C12_i{i}_t{t}", lhs, ">=", 0.0))

    return out


def violations_to_json(violations) -> list[dict]:
    return [vio.to_json() for vio in violations]


def evaluate(instance: Instance, solution, arcs: ArcSets | None = None) -> Metrics:
    """Metrics for a feasible solution.

    The headline objective is real (energy) objective plus penalties by
    construction, so ``objective == real_objective + penalty_total`` holds
    exactly, not merely up to rounding.
    """
    if arcs is None:
        arcs = build_arcs(instance)
    violations = check_feasibility(instance, arcs, solution)
    if violations:
        raise InfeasibleSolutionError(violations)
    values = _values_of(solution)
    n = len(instance.sensors)
    energy = tuple(float(values[VarRef("e", (i,))]) for i in range(n))
    real = sum(energy)
    uncovered = 0
    penalty = 0.0
    activations = 0
    for ref, val in values.items():
        if ref.kind == "h" and val:
            uncovered += 1
            penalty += instance.penalty_uncovered
        elif ref.kind == "r" and val:
            penalty += instance.penalty_activation
        elif ref.kind == "w" and val:
            activations += 1
    denom = instance.demanded_triples()
    return Metrics(
        objective=real + penalty,
        real_objective=real,
        penalty_total=penalty,
        uncovered_rate=(uncovered / denom) if denom else 0.0,
        per_sensor_energy=energy,
        activations=activations,
    )
