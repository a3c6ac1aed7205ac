"""Integer linear program for multi-period coverage scheduling.

The decision variables, one binary unless noted:

==========  =====================  ==================================================
kind        indices                meaning
==========  =====================  ==================================================
``x``       (i, j, t, g)           sensor i covers demand point j in period t for
                                   phenomenon g (requires a coverage arc)
``y``       (i, t)                 sensor i is active in period t
``z``       (l, i, j, t, g)        the arc i -> j carries the stream that sensor l
                                   produced for phenomenon g in period t; j is a
                                   global node id (sinks follow sensors)
``w``       (i, t)                 sensor i switches on at the start of period t
``r``       (i, t, g)              sensor i senses phenomenon g in period t
``h``       (j, t, g)              demand point j is left uncovered for g in t
``e``       (i,)                   continuous; total energy drawn by sensor i
==========  =====================  ==================================================

Constraint families, named in tags and in validator reports:

* C2   every demanded (j, t, g) is covered or pays the uncovered penalty
* C3   covering requires sensing the phenomenon
* C4   sensing requires being active
* C5   flow conservation for each stream at every sensor other than its source
* C6   a stream leaves its source exactly when the source senses
* C7   an arc can carry a stream only if its tail sensor is active
* C8   ... and only if its head, when a sensor, is active (sinks are always on)
* C9   per-sensor energy accounting defines e
* C10  battery bounds 0 <= e <= capacity (kept as variable bounds)
* C11  switching on is counted in the first period
* C12  ... and at every off-to-on transition
* C13  integrality (implicit in the binary declarations)

A stream variable z exists for a source l only if l has at least one
coverage arc for g (otherwise C6 pins r to zero and no routing can occur),
and never on an arc pointing back into l.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .instance import ArcSets, EnergyTables, Instance, arcs_match

KIND_ORDER = ("x", "y", "z", "w", "r", "h", "e")

_KIND_FIELDS = {
    "x": "ijtg",
    "y": "it",
    "z": "lijtg",
    "w": "it",
    "r": "itg",
    "h": "jtg",
    "e": "i",
}


@dataclass(frozen=True)
class VarRef:
    """A model variable, identified by kind and index tuple."""

    kind: str
    indices: tuple[int, ...]

    @property
    def name(self) -> str:
        fields = _KIND_FIELDS[self.kind]
        parts = "".join(f"_{f}{v}" for f, v in zip(fields, self.indices))
        return f"{self.kind}{parts}"

    def sort_key(self):
        return (KIND_ORDER.index(self.kind), self.indices)


def parse_var_name(name: str) -> VarRef:
    """Inverse of :attr:`VarRef.name`; raises ValueError on malformed names."""
    parts = name.split("_")
    kind = parts[0]
    fields = _KIND_FIELDS.get(kind)
    if fields is None or len(parts) != len(fields) + 1:
        raise ValueError(f"malformed variable name {name!r}")
    indices = []
    for field_char, token in zip(fields, parts[1:]):
        if not token.startswith(field_char) or not token[1:].isdigit():
            raise ValueError(f"malformed variable name {name!r}")
        indices.append(int(token[1:]))
    return VarRef(kind, tuple(indices))


@dataclass(frozen=True)
class LinearConstraint:
    tag: str
    terms: tuple[tuple[VarRef, float], ...]
    sense: str  # "<=" | ">=" | "="
    rhs: float


@dataclass(frozen=True)
class IlpModel:
    """An immutable ILP: minimize objective subject to constraints.

    Variables of kind ``e`` are continuous with the bounds listed in
    ``bounds``; all other kinds are binary.
    """

    variables: tuple[VarRef, ...]
    objective: tuple[tuple[VarRef, float], ...]
    constraints: tuple[LinearConstraint, ...]
    bounds: tuple[tuple[VarRef, float, float], ...]

    @cached_property
    def variable_index(self) -> dict[VarRef, int]:
        return {ref: k for k, ref in enumerate(self.variables)}

    def is_binary(self, ref: VarRef) -> bool:
        return ref.kind != "e"


def _stream_sources(arcs: ArcSets, g: int) -> list[int]:
    # Sensors that could sense phenomenon g: those with a coverage arc.
    return sorted({i for i, _ in arcs.coverage[g]})


def variable_universe(instance: Instance, arcs: ArcSets) -> tuple[VarRef, ...]:
    """Every variable the model for (instance, arcs) contains, in canonical
    order: x, y, z, w, r, h, e; within a kind, sorted by index tuple."""
    if not arcs_match(instance, arcs):
        raise ValueError("arc sets were not built from this instance")
    n = len(instance.sensors)
    T = instance.periods
    G = len(instance.phenomena)

    xs = sorted(
        (i, j, t, g)
        for g in range(G)
        for (i, j) in arcs.coverage[g]
        for t in range(T)
    )
    ys = [(i, t) for i in range(n) for t in range(T)]
    stream_arcs = list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]
    zs = sorted(
        (l, i, j, t, g)
        for g in range(G)
        for l in _stream_sources(arcs, g)
        for (i, j) in stream_arcs
        if j != l
        for t in range(T)
    )
    ws = [(i, t) for i in range(n) for t in range(T)]
    rs = [(i, t, g) for i in range(n) for t in range(T) for g in range(G)]
    hs = sorted(
        (j, t, g)
        for g in range(G)
        for j in instance.demand_indices(g)
        for t in range(T)
    )
    es = [(i,) for i in range(n)]

    out = []
    out += [VarRef("x", idx) for idx in xs]
    out += [VarRef("y", idx) for idx in ys]
    out += [VarRef("z", idx) for idx in zs]
    out += [VarRef("w", idx) for idx in ws]
    out += [VarRef("r", idx) for idx in rs]
    out += [VarRef("h", idx) for idx in hs]
    out += [VarRef("e", idx) for idx in es]
    return tuple(out)


def build_model(
    instance: Instance,
    arcs: ArcSets,
    per_phenomenon_fixed_energy: bool = False,
) -> IlpModel:
    """Assemble the ILP for an instance and its derived arcs.

    Maintenance and activation energy are charged once per period in the
    accounting row C9.  ``per_phenomenon_fixed_energy=True`` switches to
    charging them once per period per phenomenon instead (the accounting
    variant in which the fixed terms sit inside the per-phenomenon sum);
    exports only, the validator always applies the default accounting.
    """
    if not arcs_match(instance, arcs):
        raise ValueError("arc sets were not built from this instance")
    n = len(instance.sensors)
    T = instance.periods
    G = len(instance.phenomena)
    tables = EnergyTables(instance, arcs)
    fixed_mult = G if per_phenomenon_fixed_energy else 1

    variables = variable_universe(instance, arcs)
    universe = set(variables)

    def x(i, j, t, g):
        return VarRef("x", (i, j, t, g))

    def y(i, t):
        return VarRef("y", (i, t))

    def z(l, i, j, t, g):
        return VarRef("z", (l, i, j, t, g))

    def w(i, t):
        return VarRef("w", (i, t))

    def r(i, t, g):
        return VarRef("r", (i, t, g))

    def h(j, t, g):
        return VarRef("h", (j, t, g))

    def e(i):
        return VarRef("e", (i,))

    stream_arcs = list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]
    in_s = {j: [] for j in range(n)}  # sensor-to-sensor arcs into each sensor
    out_all = {i: [] for i in range(n)}  # arcs out of each sensor, sink heads included
    for (i, j) in arcs.comm:
        in_s[j].append((i, j))
        out_all[i].append((i, j))
    for (i, k) in arcs.to_sink:
        out_all[i].append((i, n + k))
    for i in range(n):
        in_s[i].sort()
        out_all[i].sort()

    sources = {g: _stream_sources(arcs, g) for g in range(G)}
    cover_of = {}  # (j, g) -> sensors with a coverage arc onto j
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            cover_of.setdefault((j, g), []).append(i)

    cons: list[LinearConstraint] = []

    # C2: cover every demanded (j, t, g) or take the penalty.
    for g in range(G):
        for j in instance.demand_indices(g):
            for t in range(T):
                terms = [(x(i, j, t, g), 1.0) for i in sorted(cover_of.get((j, g), []))]
                terms.append((h(j, t, g), 1.0))
                cons.append(LinearConstraint(f"C2_j{j}_t{t}_g{g}", tuple(terms), ">=", 1.0))

    # C3: covering a point requires sensing the phenomenon.
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            for t in range(T):
                cons.append(LinearConstraint(
                    f"C3_i{i}_j{j}_t{t}_g{g}",
                    ((x(i, j, t, g), 1.0), (r(i, t, g), -1.0)), "<=", 0.0))

    # C4: sensing requires being active.
    for i in range(n):
        for t in range(T):
            for g in range(G):
                cons.append(LinearConstraint(
                    f"C4_i{i}_t{t}_g{g}",
                    ((r(i, t, g), 1.0), (y(i, t), -1.0)), "<=", 0.0))

    # C5: at every sensor other than the source, stream in equals stream out.
    # Sinks absorb; no balance row is written for them.  Rows with no terms
    # at all (isolated sensors) are skipped.
    for g in range(G):
        for l in sources[g]:
            for t in range(T):
                for j in range(n):
                    if j == l:
                        continue
                    terms = [(z(l, a, b, t, g), 1.0) for (a, b) in in_s[j]]
                    terms += [(z(l, a, b, t, g), -1.0) for (a, b) in out_all[j] if b != l]
                    if not terms:
                        continue
                    cons.append(LinearConstraint(
                        f"C5_l{l}_j{j}_t{t}_g{g}", tuple(terms), "=", 0.0))

    # C6: a stream leaves its source exactly when the source senses.  For
    # sensors with no coverage arc the z-sum is empty and the row pins r to 0.
    for g in range(G):
        src = set(sources[g])
        for l in range(n):
            for t in range(T):
                terms = []
                if l in src:
                    terms = [(z(l, a, b, t, g), 1.0) for (a, b) in out_all[l] if b != l]
                terms.append((r(l, t, g), -1.0))
                cons.append(LinearConstraint(
                    f"C6_l{l}_t{t}_g{g}", tuple(terms), "=", 0.0))

    # C7/C8: arcs carry streams only between active sensors.
    for ref in variables:
        if ref.kind != "z":
            continue
        l, i, j, t, g = ref.indices
        cons.append(LinearConstraint(
            f"C7_l{l}_i{i}_j{j}_t{t}_g{g}", ((ref, 1.0), (y(i, t), -1.0)), "<=", 0.0))
    for ref in variables:
        if ref.kind != "z":
            continue
        l, i, j, t, g = ref.indices
        if j < n:  # sink heads have no activity variable
            cons.append(LinearConstraint(
                f"C8_l{l}_i{i}_j{j}_t{t}_g{g}", ((ref, 1.0), (y(j, t), -1.0)), "<=", 0.0))

    # C9: energy accounting per sensor.
    for i in range(n):
        terms: list[tuple[VarRef, float]] = []
        for t in range(T):
            terms.append((y(i, t), tables.em * fixed_mult))
        for t in range(T):
            terms.append((w(i, t), tables.ea * fixed_mult))
        for t in range(T):
            for g in range(G):
                for (a, b) in in_s[i]:
                    for l in sources[g]:
                        if i == l:
                            continue
                        terms.append((z(l, a, b, t, g), tables.er[g]))
                for (a, b) in out_all[i]:
                    for l in sources[g]:
                        if b == l:
                            continue
                        terms.append((z(l, a, b, t, g), tables.et[(a, b)][g]))
        terms.append((e(i), -1.0))
        cons.append(LinearConstraint(f"C9_i{i}", tuple(terms), "<=", 0.0))

    # C11/C12: count off-to-on transitions.
    for i in range(n):
        cons.append(LinearConstraint(
            f"C11_i{i}", ((w(i, 0), 1.0), (y(i, 0), -1.0)), ">=", 0.0))
    for i in range(n):
        for t in range(1, T):
            cons.append(LinearConstraint(
                f"C12_i{i}_t{t}",
                ((w(i, t), 1.0), (y(i, t), -1.0), (y(i, t - 1), 1.0)), ">=", 0.0))

    # Objective: total drawn energy plus coverage and activation penalties.
    objective: list[tuple[VarRef, float]] = []
    for i in range(n):
        objective.append((e(i), 1.0))
    for ref in variables:
        if ref.kind == "h":
            objective.append((ref, tables.eh))
    if tables.eg != 0.0:
        for ref in variables:
            if ref.kind == "r":
                objective.append((ref, tables.eg))

    bounds = tuple((e(i), 0.0, tables.eb) for i in range(n))

    model = IlpModel(
        variables=variables,
        objective=tuple(objective),
        constraints=tuple(cons),
        bounds=bounds,
    )
    for ref, _ in model.objective:
        assert ref in universe
    for c in model.constraints:
        for ref, _ in c.terms:
            assert ref in universe, f"undeclared variable {ref.name} in {c.tag}"
    return model


def model_stats(model: IlpModel) -> dict:
    """Size summary: variable counts by kind, constraint counts by family."""
    var_counts: dict[str, int] = {k: 0 for k in KIND_ORDER}
    for ref in model.variables:
        var_counts[ref.kind] += 1
    con_counts: dict[str, int] = {}
    for c in model.constraints:
        family = c.tag.split("_", 1)[0]
        con_counts[family] = con_counts.get(family, 0) + 1
    n_bin = sum(v for k, v in var_counts.items() if k != "e")
    return {
        "variables": {**var_counts, "total": len(model.variables),
                      "binary": n_bin, "continuous": var_counts["e"]},
        "constraints": {**dict(sorted(con_counts.items())), "total": len(model.constraints)},
        "objective_terms": len(model.objective),
    }
