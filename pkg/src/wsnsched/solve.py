"""Solvers for the scheduling ILP.

Three methods with very different trust stories:

* :func:`brute_force_oracle` enumerates assignments outright.  Slow and
  deliberately simple; it shares no search or bounding machinery with the
  branch-and-bound solver, so the two can check each other.
* :func:`solve_exact` is a depth-first branch-and-bound over the sensing
  decisions; each sensed stream is then routed by choosing among that
  commodity's feasible flows.  Returns a certificate flag that is True
  only when the search ran to completion with gap 0.
* :func:`solve_heuristic` is a greedy weighted set cover per period and
  phenomenon with shortest-path routing and running battery accounting.

All three are deterministic: ties are broken by fixed orderings, never by
hash order or a clock.
"""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .instance import ArcSets, EnergyTables, Instance, arcs_match, build_arcs
from .model import IlpModel, VarRef, parse_var_name, variable_universe

SOLUTION_FORMAT = "wsn-solution/1"
BATTERY_TOL = 1e-6
ORACLE_CAP_DEFAULT = 40


@dataclass(frozen=True)
class SolveConfig:
    """Limits for the exact solver; the other methods ignore most fields.

    ``rng_seed`` is recorded for provenance but unused: every method is
    deterministic.  ``node_limit`` of 0 means unlimited.
    """

    time_limit_s: float = 60.0
    node_limit: int = 0
    gap: float = 0.0
    rng_seed: int = 0


@dataclass(frozen=True)
class Solution:
    """A complete variable assignment plus provenance.

    ``values`` maps every variable of the instance's model to its value
    (ints for binaries, float for energies).  ``objective`` is the cost
    the producer claims; the validator recomputes it independently.
    """

    values: dict
    provenance: str  # "exact" | "heuristic" | "oracle" | "external"
    wall_time_s: float
    objective: float | None = None


class OracleCapExceeded(ValueError):
    """The instance has more binary variables than the oracle will accept."""


# -- shared index structures ----------------------------------------------------


class _Structures:
    """Adjacency and cost tables used by the exact and heuristic solvers."""

    def __init__(self, instance: Instance, arcs: ArcSets):
        self.instance = instance
        self.arcs = arcs
        self.tables = EnergyTables(instance, arcs)
        self.n = len(instance.sensors)
        self.T = instance.periods
        self.G = len(instance.phenomena)
        n = self.n
        self.stream_arcs = sorted(
            list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]
        )
        self.out_arcs: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
        for (a, b) in self.stream_arcs:
            self.out_arcs[a].append((a, b))
        self.sources = [sorted({i for i, _ in arcs.coverage[g]}) for g in range(self.G)]
        # Demanded points only: sensing a point nobody asked about never helps.
        self.cand: dict[tuple[int, int], list[int]] = {}
        self.sensor_cover: dict[tuple[int, int], list[int]] = {}
        for g in range(self.G):
            demanded = set(instance.demand_indices(g))
            for (i, j) in arcs.coverage[g]:
                if j in demanded:
                    self.cand.setdefault((j, g), []).append(i)
                    self.sensor_cover.setdefault((i, g), []).append(j)
        self.demanded = [
            (j, t, g)
            for g in range(self.G)
            for j in instance.demand_indices(g)
            for t in range(self.T)
        ]

    def route_min(self, l: int, g: int) -> float:
        """Cheapest route cost from sensor l to any sink for phenomenon g.

        An arc costs the tail's transmit energy plus, for sensor heads,
        the head's receive energy; sinks receive for free.  inf when no
        sink is reachable.
        """
        et, er = self.tables.et, self.tables.er[g]
        n = self.n
        dist = {l: 0.0}
        heap = [(0.0, l)]
        best = math.inf
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, math.inf):
                continue
            if u >= n:
                best = min(best, d)
                continue
            for (a, b) in self.out_arcs[u]:
                if b == l:
                    continue
                nd = d + et[(a, b)][g] + (er if b < n else 0.0)
                if nd < dist.get(b, math.inf):
                    dist[b] = nd
                    heapq.heappush(heap, (nd, b))
        return best


@dataclass(frozen=True)
class _Flow:
    """One feasible routing of a single stream: arcs and per-sensor energy."""

    arcs: tuple[tuple[int, int], ...]
    energy: tuple[tuple[int, float], ...]
    cost: float


def _make_flow(s: _Structures, g: int, chosen: tuple[tuple[int, int], ...]) -> _Flow:
    energy: dict[int, float] = {}
    for (a, b) in chosen:
        energy[a] = energy.get(a, 0.0) + s.tables.et[(a, b)][g]
        if b < s.n:
            energy[b] = energy.get(b, 0.0) + s.tables.er[g]
    cost = sum(energy.values())
    return _Flow(arcs=chosen, energy=tuple(sorted(energy.items())), cost=cost)


def _enumerate_flows(s: _Structures, l: int, g: int, arc_cap: int = 18):
    """Every arc subset that routes one unit from l into the sinks.

    Exactly one arc leaves l and every other sensor is balanced; sinks
    absorb.  Returns (flows sorted by cost, complete); complete is False
    when the commodity has more than ``arc_cap`` arcs and only the
    cheapest route was produced.
    """
    n = s.n
    arcs_list = [(a, b) for (a, b) in s.stream_arcs if b != l]
    m = len(arcs_list)
    if m == 0:
        return [], True
    if m > arc_cap:
        flow = _cheapest_flow(s, l, g)
        return ([flow] if flow is not None else []), False

    # Balance is checked as soon as the last arc touching a sensor is
    # assigned, which kills most of the 2^m tree early.
    last_touch: dict[int, int] = {}
    for idx, (a, b) in enumerate(arcs_list):
        last_touch[a] = idx
        if b < n:
            last_touch[b] = idx
    close_at: dict[int, list[int]] = {}
    for node, idx in last_touch.items():
        close_at.setdefault(idx, []).append(node)

    inflow = [0] * n
    outflow = [0] * n
    chosen: list[int] = []
    flows: list[_Flow] = []

    def balanced(node: int) -> bool:
        if node == l:
            return outflow[l] == 1
        return inflow[node] == outflow[node]

    def rec(k: int):
        if k == m:
            if outflow[l] == 1:
                flows.append(_make_flow(s, g, tuple(arcs_list[i] for i in chosen)))
            return
        a, b = arcs_list[k]
        for val in (0, 1):
            if val:
                if a == l and outflow[l] >= 1:
                    continue
                outflow[a] += 1
                if b < n:
                    inflow[b] += 1
                chosen.append(k)
            if all(balanced(node) for node in close_at.get(k, ())):
                rec(k + 1)
            if val:
                outflow[a] -= 1
                if b < n:
                    inflow[b] -= 1
                chosen.pop()

    rec(0)
    flows.sort(key=lambda f: (f.cost, f.arcs))
    return flows, True


def _cheapest_flow(s: _Structures, l: int, g: int) -> _Flow | None:
    """Shortest-path route from l to the nearest sink, as a flow."""
    et, er = s.tables.et, s.tables.er[g]
    n = s.n
    dist = {l: 0.0}
    prev: dict[int, tuple[int, int]] = {}
    heap = [(0.0, l)]
    best_sink, best_cost = None, math.inf
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        if u >= n:
            if d < best_cost:
                best_sink, best_cost = u, d
            continue
        for (a, b) in s.out_arcs[u]:
            if b == l:
                continue
            nd = d + et[(a, b)][g] + (er if b < n else 0.0)
            if nd < dist.get(b, math.inf):
                dist[b] = nd
                prev[b] = (a, b)
                heapq.heappush(heap, (nd, b))
    if best_sink is None:
        return None
    path = []
    node = best_sink
    while node != l:
        arc = prev[node]
        path.append(arc)
        node = arc[0]
    return _make_flow(s, g, tuple(sorted(path)))


# -- exact branch and bound ------------------------------------------------------


class _SearchLimit(Exception):
    pass


class _ExactSearch:
    """DFS branch-and-bound: sensing decisions first, then stream routing.

    The lower bound amortizes each candidate sensor's sensing cost (the
    activation penalty plus its cheapest route) over the open demand
    triples it could still cover, and counts maintenance and activation
    energy only once they are certain, so it never exceeds the cost of
    any completion of the current partial assignment.
    """

    def __init__(self, instance: Instance, arcs: ArcSets, config: SolveConfig):
        self.s = _Structures(instance, arcs)
        self.cfg = config
        s = self.s
        t = s.tables
        self.em, self.ea, self.eb = t.em, t.ea, t.eb
        self.eh, self.eg = t.eh, t.eg
        self.r_list = [
            (i, tt, g) for i in range(s.n) for tt in range(s.T) for g in range(s.G)
        ]
        self.route_lb = {
            (i, g): s.route_min(i, g) if (i, g) in s.sensor_cover else math.inf
            for i in range(s.n)
            for g in range(s.G)
        }
        self.r_val: dict[tuple[int, int, int], int] = {}
        self.cover_count = {key: 0 for key in s.demanded}
        self.cand_left = {
            (j, tt, g): len(s.cand.get((j, g), ())) for (j, tt, g) in s.demanded
        }
        self.em_active: dict[tuple[int, int], int] = {}
        self.commit_cost = 0.0
        self.em_count = 0
        self.ea0_count = 0
        # Incumbent: the all-off schedule, always feasible.
        self.best_obj = self.eh * len(s.demanded)
        self.best_r: dict[tuple[int, int, int], int] = {}
        self.best_flows: dict = {}
        self.nodes = 0
        self.truncated = False
        self.deadline = time.perf_counter() + config.time_limit_s
        self._flow_cache: dict[tuple[int, int], tuple[list[_Flow], bool]] = {}
        # routing-phase state
        self.en = [0.0] * s.n
        self.y_state: set[tuple[int, int]] = set()
        self.active: list[tuple[int, int, int]] = []
        self.obj_base = 0.0
        self.flow_choice: dict = {}

    def _slack(self) -> float:
        return max(1e-12, self.cfg.gap * abs(self.best_obj))

    def _tick(self):
        self.nodes += 1
        if self.cfg.node_limit and self.nodes > self.cfg.node_limit:
            raise _SearchLimit()
        if self.nodes % 128 == 0 and time.perf_counter() > self.deadline:
            raise _SearchLimit()

    def flows_for(self, l: int, g: int):
        key = (l, g)
        if key not in self._flow_cache:
            self._flow_cache[key] = _enumerate_flows(self.s, l, g)
        return self._flow_cache[key]

    def run(self) -> bool:
        completed = True
        try:
            self._branch_r(0)
        except _SearchLimit:
            completed = False
        return completed and not self.truncated and self.cfg.gap == 0.0

    # -- sensing phase --

    def _branch_r(self, d: int):
        self._tick()
        if self._bound_r() >= self.best_obj - self._slack():
            return
        if d == len(self.r_list):
            self._start_routing()
            return
        i, t, g = self.r_list[d]
        covers = self.s.sensor_cover.get((i, g), ())
        for val in (1, 0):
            if val and math.isinf(self.route_lb[(i, g)]):
                continue  # sensing with no route to any sink is infeasible
            self.r_val[(i, t, g)] = val
            if val:
                self.commit_cost += self.eg + self.route_lb[(i, g)]
                cnt = self.em_active.get((i, t), 0)
                self.em_active[(i, t)] = cnt + 1
                if cnt == 0:
                    self.em_count += 1
                    if t == 0:
                        self.ea0_count += 1
                for j in covers:
                    self.cover_count[(j, t, g)] += 1
            for j in covers:
                self.cand_left[(j, t, g)] -= 1
            self._branch_r(d + 1)
            for j in covers:
                self.cand_left[(j, t, g)] += 1
            if val:
                self.commit_cost -= self.eg + self.route_lb[(i, g)]
                cnt = self.em_active[(i, t)] - 1
                self.em_active[(i, t)] = cnt
                if cnt == 0:
                    self.em_count -= 1
                    if t == 0:
                        self.ea0_count -= 1
                for j in covers:
                    self.cover_count[(j, t, g)] -= 1
            del self.r_val[(i, t, g)]

    def _bound_r(self) -> float:
        bound = self.commit_cost + self.em * self.em_count + self.ea * self.ea0_count
        for (j, t, g), cc in self.cover_count.items():
            if cc > 0:
                continue
            if self.cand_left[(j, t, g)] == 0:
                bound += self.eh
                continue
            cheapest = self.eh
            for i in self.s.cand[(j, g)]:
                if (i, t, g) in self.r_val:
                    continue
                k = sum(
                    1
                    for jj in self.s.sensor_cover[(i, g)]
                    if self.cover_count[(jj, t, g)] == 0
                )
                share = (self.eg + self.route_lb[(i, g)]) / k
                if share < cheapest:
                    cheapest = share
            bound += cheapest
        return bound

    # -- routing phase --

    def _start_routing(self):
        uncovered = sum(1 for cc in self.cover_count.values() if cc == 0)
        self.active = sorted(key for key, val in self.r_val.items() if val)
        self.obj_base = self.eh * uncovered + self.eg * len(self.active)
        self.en = [0.0] * self.s.n
        self.y_state = set()
        for (i, t), cnt in self.em_active.items():
            if cnt > 0:
                self.y_state.add((i, t))
                self.en[i] += self.em
        self.flow_choice = {}
        self._branch_flows(0)

    def _branch_flows(self, q: int):
        self._tick()
        ea_lb = self.ea * sum(1 for (i, t) in self.y_state if t == 0)
        remaining = sum(self.route_lb[(l, g)] for (l, t, g) in self.active[q:])
        base = sum(self.en) + ea_lb + self.obj_base
        if base + remaining >= self.best_obj - self._slack():
            return
        if q == len(self.active):
            self._leaf()
            return
        l, t, g = self.active[q]
        flows, complete = self.flows_for(l, g)
        if not complete:
            self.truncated = True
        rest = remaining - self.route_lb[(l, g)]
        for flow in flows:
            if base + rest + flow.cost >= self.best_obj - self._slack():
                break  # flows are cost-sorted; the rest only cost more
            undo = self._apply_flow(flow, t)
            if undo is None:
                continue
            self.flow_choice[(l, t, g)] = flow.arcs
            self._branch_flows(q + 1)
            del self.flow_choice[(l, t, g)]
            self._undo_flow(undo)

    def _apply_flow(self, flow: _Flow, t: int):
        deltas: list[tuple[int, float]] = []
        activated: list[tuple[int, int]] = []
        cap = self.eb + BATTERY_TOL
        for (u, energy) in flow.energy:
            self.en[u] += energy
            deltas.append((u, energy))
            if (u, t) not in self.y_state:
                self.y_state.add((u, t))
                activated.append((u, t))
                self.en[u] += self.em
            if self.en[u] + (self.ea if (u, 0) in self.y_state else 0.0) > cap:
                self._undo_flow((deltas, activated))
                return None
        return (deltas, activated)

    def _undo_flow(self, undo):
        deltas, activated = undo
        for (u, energy) in deltas:
            self.en[u] -= energy
        for (u, t) in activated:
            self.y_state.discard((u, t))
            self.en[u] -= self.em

    def _leaf(self):
        s = self.s
        total = self.obj_base
        for i in range(s.n):
            trans = 0
            prev = False
            for t in range(s.T):
                cur = (i, t) in self.y_state
                if cur and not prev:
                    trans += 1
                prev = cur
            ei = self.en[i] + self.ea * trans
            if ei > self.eb + BATTERY_TOL:
                return
            total += ei
        if total < self.best_obj - 1e-12:
            self.best_obj = total
            self.best_r = dict(self.r_val)
            self.best_flows = dict(self.flow_choice)

    # -- solution reconstruction --

    def build_solution(self, wall_time: float) -> Solution:
        s = self.s
        values = {ref: 0 for ref in variable_universe(s.instance, s.arcs)}
        y_state: set[tuple[int, int]] = set()
        en = [0.0] * s.n
        for (i, t, g), val in self.best_r.items():
            if val:
                values[VarRef("r", (i, t, g))] = 1
                if (i, t) not in y_state:
                    y_state.add((i, t))
                    en[i] += self.em
        for g in range(s.G):
            for (i, j) in s.arcs.coverage[g]:
                for t in range(s.T):
                    if self.best_r.get((i, t, g)):
                        values[VarRef("x", (i, j, t, g))] = 1
        for (l, t, g), flow_arcs in self.best_flows.items():
            for (a, b) in flow_arcs:
                values[VarRef("z", (l, a, b, t, g))] = 1
                en[a] += s.tables.et[(a, b)][g]
                heads = (a,) if b >= s.n else (a, b)
                for u in heads:
                    if (u, t) not in y_state:
                        y_state.add((u, t))
                        en[u] += self.em
                if b < s.n:
                    en[b] += s.tables.er[g]
        for (i, t) in y_state:
            values[VarRef("y", (i, t))] = 1
        objective = 0.0
        for i in range(s.n):
            prev = False
            for t in range(s.T):
                cur = (i, t) in y_state
                if cur and not prev:
                    values[VarRef("w", (i, t))] = 1
                    en[i] += self.ea
                prev = cur
            values[VarRef("e", (i,))] = en[i]
            objective += en[i]
        n_sensing = 0
        for (key, val) in self.best_r.items():
            n_sensing += val
        for (j, t, g) in s.demanded:
            covered = any(self.best_r.get((i, t, g)) for i in s.cand.get((j, g), ()))
            if not covered:
                values[VarRef("h", (j, t, g))] = 1
                objective += self.eh
        objective += self.eg * n_sensing
        return Solution(values=values, provenance="exact",
                        wall_time_s=wall_time, objective=objective)


def solve_exact(
    instance: Instance,
    arcs: ArcSets | None = None,
    model: IlpModel | None = None,
    config: SolveConfig | None = None,
) -> tuple[Solution, bool]:
    """Minimize the objective by branch and bound.

    Returns (solution, certificate); the certificate is True only when the
    search completed with gap 0, in which case the solution is optimal.
    The optional ``model`` is accepted for interface symmetry and checked
    for basic consistency; the search itself works from the instance.
    """
    if arcs is None:
        arcs = build_arcs(instance)
    if not arcs_match(instance, arcs):
        raise ValueError("arc sets were not built from this instance")
    if model is not None and len(model.bounds) != len(instance.sensors):
        raise ValueError("model was not built from this instance")
    cfg = config or SolveConfig()
    t0 = time.perf_counter()
    search = _ExactSearch(instance, arcs, cfg)
    certificate = search.run()
    solution = search.build_solution(time.perf_counter() - t0)
    return solution, certificate


# -- exhaustive oracle -----------------------------------------------------------


def brute_force_oracle(
    instance: Instance,
    arcs: ArcSets | None = None,
    cap: int = ORACLE_CAP_DEFAULT,
) -> Solution:
    """Provably optimal solution by exhaustive enumeration.

    Enumerates every assignment of the independent binaries (x, z, r) and
    derives the forced completion of the dependent ones: y is the minimal
    activity pattern consistent with the assignment, w its transitions, h
    the uncovered indicators, e the accounted energy.  Because maintenance,
    activation and penalty costs are nonnegative, some optimal solution
    always has this shape, so the enumeration loses nothing.  Ties go to
    the lexicographically smallest (x, z, r) assignment in model variable
    order, and with positive fixed energies the completion is the unique
    optimal one.

    Raises :class:`OracleCapExceeded` when the model has more than ``cap``
    binary variables (enumeration time grows as 2^free).
    """
    if arcs is None:
        arcs = build_arcs(instance)
    if not arcs_match(instance, arcs):
        raise ValueError("arc sets were not built from this instance")
    t0 = time.perf_counter()
    universe = variable_universe(instance, arcs)
    n_binary = sum(1 for ref in universe if ref.kind != "e")
    if n_binary > cap:
        raise OracleCapExceeded(
            f"instance has {n_binary} binary variables, oracle cap is {cap}"
        )
    tables = EnergyTables(instance, arcs)
    n = len(instance.sensors)
    T = instance.periods
    G = len(instance.phenomena)

    free = [ref for ref in universe if ref.kind in ("x", "z", "r")]
    col = {ref: k for k, ref in enumerate(free)}
    nf = len(free)

    demanded = [
        (j, t, g)
        for g in range(G)
        for j in instance.demand_indices(g)
        for t in range(T)
    ]
    cover_cols: dict[tuple[int, int, int], list[int]] = {key: [] for key in demanded}
    for ref in free:
        if ref.kind == "x":
            i, j, t, g = ref.indices
            if (j, t, g) in cover_cols:
                cover_cols[(j, t, g)].append(col[ref])
    sources = [sorted({i for i, _ in arcs.coverage[g]}) for g in range(G)]
    stream_arcs = list(arcs.comm) + [(i, n + k) for i, k in arcs.to_sink]

    # C5/C6 rows as free-column index lists.
    c5_rows: list[tuple[list[int], list[int]]] = []
    c6_rows: list[tuple[list[int], int]] = []
    for g in range(G):
        src = set(sources[g])
        for l in sources[g]:
            for t in range(T):
                for j in range(n):
                    if j == l:
                        continue
                    ins = [col[VarRef("z", (l, a, b, t, g))]
                           for (a, b) in stream_arcs if b == j]
                    outs = [col[VarRef("z", (l, a, b, t, g))]
                            for (a, b) in stream_arcs if a == j and b != l]
                    if ins or outs:
                        c5_rows.append((ins, outs))
        for l in range(n):
            for t in range(T):
                outs = []
                if l in src:
                    outs = [col[VarRef("z", (l, a, b, t, g))]
                            for (a, b) in stream_arcs if a == l and b != l]
                c6_rows.append((outs, col[VarRef("r", (l, t, g))]))

    x_pairs = []  # C3: x column with its matching r column
    for ref in free:
        if ref.kind == "x":
            i, j, t, g = ref.indices
            x_pairs.append((col[ref], col[VarRef("r", (i, t, g))]))

    # Which free columns force a sensor active at (i, t), and what each
    # chosen column costs each sensor.
    act_cols: dict[tuple[int, int], list[int]] = {
        (i, t): [] for i in range(n) for t in range(T)
    }
    energy_coef: list[dict[int, float]] = [dict() for _ in range(n)]
    for ref in free:
        if ref.kind == "r":
            i, t, g = ref.indices
            act_cols[(i, t)].append(col[ref])
        elif ref.kind == "z":
            l, a, b, t, g = ref.indices
            c = col[ref]
            act_cols[(a, t)].append(c)
            energy_coef[a][c] = energy_coef[a].get(c, 0.0) + tables.et[(a, b)][g]
            if b < n:
                act_cols[(b, t)].append(c)
                energy_coef[b][c] = energy_coef[b].get(c, 0.0) + tables.er[g]

    r_cols_all = [col[ref] for ref in free if ref.kind == "r"]

    best_code = None
    best_obj = math.inf
    batch_bits = min(nf, 20)
    total = 1 << nf
    shifts = np.array([nf - 1 - k for k in range(nf)], dtype=np.uint64)
    for start in range(0, total, 1 << batch_bits):
        stop = min(total, start + (1 << batch_bits))
        codes = np.arange(start, stop, dtype=np.uint64)
        bits = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
        feas = np.ones(len(codes), dtype=bool)

        for xc, rc in x_pairs:  # C3
            feas &= bits[:, xc] <= bits[:, rc]
        for ins, outs in c5_rows:  # C5
            lhs = bits[:, ins].sum(axis=1, dtype=np.int32) if ins else 0
            rhs = bits[:, outs].sum(axis=1, dtype=np.int32) if outs else 0
            feas &= lhs == rhs
        for outs, rc in c6_rows:  # C6
            lhs = bits[:, outs].sum(axis=1, dtype=np.int32) if outs else 0
            feas &= lhs == bits[:, rc]

        # Forced completion: activity, transitions, energy, uncovered.
        y = np.zeros((len(codes), n, T), dtype=bool)
        for (i, t), cols in act_cols.items():
            if cols:
                y[:, i, t] = bits[:, cols].any(axis=1)
        w = np.zeros_like(y)
        w[:, :, 0] = y[:, :, 0]
        if T > 1:
            w[:, :, 1:] = y[:, :, 1:] & ~y[:, :, :-1]
        obj = np.zeros(len(codes), dtype=np.float64)
        for i in range(n):
            e_i = tables.em * y[:, i, :].sum(axis=1) + tables.ea * w[:, i, :].sum(axis=1)
            cmap = energy_coef[i]
            if cmap:
                cols = sorted(cmap)
                coefs = np.array([cmap[c] for c in cols])
                e_i = e_i + bits[:, cols].astype(np.float64) @ coefs
            feas &= e_i <= tables.eb + BATTERY_TOL  # C10
            obj += e_i
        for key, cols in cover_cols.items():
            covered = (bits[:, cols].any(axis=1) if cols
                       else np.zeros(len(codes), dtype=bool))
            obj += tables.eh * (~covered)
        if r_cols_all and tables.eg:
            obj += tables.eg * bits[:, r_cols_all].sum(axis=1)

        obj[~feas] = math.inf
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_obj = float(obj[k])
            best_code = int(codes[k])

    assert best_code is not None  # the all-zero assignment is always feasible

    # Rebuild the winner in exact scalar arithmetic.
    values = {ref: 0 for ref in universe}
    for k, ref in enumerate(free):
        values[ref] = (best_code >> (nf - 1 - k)) & 1
    y_set = set()
    for (i, t), cols in act_cols.items():
        if any(values[free[c]] for c in cols):
            y_set.add((i, t))
            values[VarRef("y", (i, t))] = 1
    objective = 0.0
    for i in range(n):
        energy = 0.0
        prev = False
        for t in range(T):
            cur = (i, t) in y_set
            if cur:
                energy += tables.em
                if not prev:
                    values[VarRef("w", (i, t))] = 1
                    energy += tables.ea
            prev = cur
        for c, coef in sorted(energy_coef[i].items()):
            if values[free[c]]:
                energy += coef
        values[VarRef("e", (i,))] = energy
        objective += energy
    for (j, t, g), cols in cover_cols.items():
        if not any(values[free[c]] for c in cols):
            values[VarRef("h", (j, t, g))] = 1
            objective += tables.eh
    for ref in free:
        if ref.kind == "r" and values[ref]:
            objective += tables.eg

    return Solution(values=values, provenance="oracle",
                    wall_time_s=time.perf_counter() - t0, objective=objective)


# -- greedy heuristic -------------------------------------------------------------


def solve_heuristic(
    instance: Instance,
    arcs: ArcSets | None = None,
    config: SolveConfig | None = None,
) -> Solution:
    """Greedy weighted set cover with shortest-path routing.

    Periods are processed in order; within a period, phenomena in order.
    Each round activates the sensor with the cheapest marginal cost per
    newly covered demand point (sensors already active this period are
    naturally preferred, their fixed cost being sunk), immediately routes
    its stream to a sink with relay activation surcharges included in the
    path cost, and debits every battery the route touched.  Demand points
    whose every remaining cover-and-route option would overdraw a battery,
    or cost more than the uncovered penalty, take the penalty.
    """
    if arcs is None:
        arcs = build_arcs(instance)
    if not arcs_match(instance, arcs):
        raise ValueError("arc sets were not built from this instance")
    t0 = time.perf_counter()
    s = _Structures(instance, arcs)
    tb = s.tables
    n, T, G = s.n, s.T, s.G

    residual = [tb.eb] * n
    y = [[False] * T for _ in range(n)]
    r_set: set[tuple[int, int, int]] = set()
    flows: dict[tuple[int, int, int], tuple[tuple[int, int], ...]] = {}

    def surcharge(v: int, t: int) -> float:
        if y[v][t]:
            return 0.0
        fresh = t == 0 or not y[v][t - 1]
        return tb.em + (tb.ea if fresh else 0.0)

    def find_route(src: int, t: int, g: int):
        """Cheapest battery-feasible route from src; None if there is none.

        Relays whose battery cannot take their share are banned and the
        search reruns, at most once per sensor.
        """
        ban: set[int] = set()
        for _ in range(n + 1):
            path = _dijkstra_route(s, src, g, t, surcharge, ban)
            if path is None:
                return None
            arcs_p, cost = path
            deltas: dict[int, float] = {}
            for (a, b) in arcs_p:
                deltas[a] = deltas.get(a, 0.0) + tb.et[(a, b)][g]
                if b < n:
                    deltas[b] = deltas.get(b, 0.0) + tb.er[g]
            for v in list(deltas):
                if v != src:
                    deltas[v] += surcharge(v, t)
            bad = None
            for v in sorted(deltas):
                if v != src and residual[v] < deltas[v] - 1e-12:
                    bad = v
                    break
            if bad is None:
                return arcs_p, deltas, cost
            ban.add(bad)
        return None

    for t in range(T):
        for g in range(G):
            open_points = set(instance.demand_indices(g))
            while open_points:
                best = None
                for i in range(n):
                    if (i, t, g) in r_set or (i, g) not in s.sensor_cover:
                        continue
                    newly = [j for j in s.sensor_cover[(i, g)] if j in open_points]
                    if not newly:
                        continue
                    own = surcharge(i, t)
                    route = find_route(i, t, g)
                    if route is None:
                        continue
                    arcs_p, deltas, route_cost = route
                    if residual[i] < own + deltas.get(i, 0.0) - 1e-12:
                        continue
                    marginal = tb.eg + own + route_cost
                    if marginal > tb.eh * len(newly):
                        continue  # paying the penalty is cheaper
                    score = (marginal / len(newly), -residual[i], i)
                    if best is None or score < best[0]:
                        best = (score, i, newly, arcs_p, deltas, own)
                if best is None:
                    break  # leftovers take the penalty via h
                _, i, newly, arcs_p, deltas, own = best
                r_set.add((i, t, g))
                flows[(i, t, g)] = arcs_p
                y[i][t] = True
                residual[i] -= own
                for v, delta in sorted(deltas.items()):
                    if v != i:
                        y[v][t] = True
                    residual[v] -= delta
                for j in newly:
                    open_points.discard(j)

    values = {ref: 0 for ref in variable_universe(instance, arcs)}
    for (i, t, g) in r_set:
        values[VarRef("r", (i, t, g))] = 1
    for g in range(G):
        for (i, j) in arcs.coverage[g]:
            for t in range(T):
                if (i, t, g) in r_set:
                    values[VarRef("x", (i, j, t, g))] = 1
    for (l, t, g), arcs_p in flows.items():
        for (a, b) in arcs_p:
            values[VarRef("z", (l, a, b, t, g))] = 1
    for (j, t, g) in s.demanded:
        if not any((i, t, g) in r_set for i in s.cand.get((j, g), ())):
            values[VarRef("h", (j, t, g))] = 1

    # Energy, accounted exactly as the energy constraint does.
    energy = [0.0] * n
    for i in range(n):
        prev = False
        for t in range(T):
            if y[i][t]:
                values[VarRef("y", (i, t))] = 1
                energy[i] += tb.em
                if not prev:
                    values[VarRef("w", (i, t))] = 1
                    energy[i] += tb.ea
            prev = y[i][t]
    for (l, t, g), arcs_p in flows.items():
        for (a, b) in arcs_p:
            energy[a] += tb.et[(a, b)][g]
            if b < n:
                energy[b] += tb.er[g]
    objective = 0.0
    for i in range(n):
        values[VarRef("e", (i,))] = energy[i]
        objective += energy[i]
    for (j, t, g) in s.demanded:
        if values[VarRef("h", (j, t, g))]:
            objective += tb.eh
    objective += tb.eg * len(r_set)

    return Solution(values=values, provenance="heuristic",
                    wall_time_s=time.perf_counter() - t0, objective=objective)


def _dijkstra_route(s: _Structures, src: int, g: int, t: int, surcharge, banned: set[int]):
    """Cheapest path src -> any sink; entering a sensor costs its receive
    energy plus its activation surcharge.  Returns (arcs, cost) or None."""
    et, er = s.tables.et, s.tables.er[g]
    n = s.n
    dist = {src: 0.0}
    prev: dict[int, tuple[int, int]] = {}
    heap = [(0.0, src)]
    best_sink, best_cost = None, math.inf
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        if u >= n:
            if d < best_cost:
                best_sink, best_cost = u, d
            continue
        for (a, b) in s.out_arcs[u]:
            if b == src or (b < n and b in banned):
                continue
            nd = d + et[(a, b)][g]
            if b < n:
                nd += er + surcharge(b, t)
            if nd < dist.get(b, math.inf):
                dist[b] = nd
                prev[b] = (a, b)
                heapq.heappush(heap, (nd, b))
    if best_sink is None:
        return None
    path = []
    node = best_sink
    while node != src:
        arc = prev[node]
        path.append(arc)
        node = arc[0]
    path.reverse()
    return tuple(path), best_cost


# -- solution files ---------------------------------------------------------------


def solution_to_json(solution: Solution) -> dict:
    nonzero = {
        ref.name: val
        for ref, val in sorted(solution.values.items(), key=lambda kv: kv[0].sort_key())
        if val
    }
    return {
        "format": SOLUTION_FORMAT,
        "provenance": solution.provenance,
        "wall_time_s": solution.wall_time_s,
        "objective": solution.objective,
        "values": nonzero,
    }


def save_solution(solution: Solution, path) -> None:
    from .ioutil import atomic_write_text

    atomic_write_text(path, json.dumps(solution_to_json(solution), indent=2) + "\n")


def load_solution(path, instance: Instance, arcs: ArcSets | None = None) -> Solution:
    """Load a solution JSON, zero-filling variables omitted from the file."""
    if arcs is None:
        arcs = build_arcs(instance)
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != SOLUTION_FORMAT:
        raise ValueError(f"unsupported solution format {data.get('format')!r}")
    values = {ref: 0 for ref in variable_universe(instance, arcs)}
    for name, val in data["values"].items():
        ref = parse_var_name(name)
        if ref not in values:
            raise ValueError(f"solution variable {name} does not belong to this instance")
        values[ref] = val if ref.kind == "e" else int(val)
    return Solution(
        values=values,
        provenance=data.get("provenance", "external"),
        wall_time_s=float(data.get("wall_time_s", 0.0)),
        objective=data.get("objective"),
    )


def parse_external_solution(text: str) -> dict[VarRef, float]:
    """Parse ``name = value`` lines as emitted by LP solvers.

    Blank lines and ``#`` comments are skipped; malformed names or values
    are an error.  Variables not mentioned default to 0 at import time.
    """
    out: dict[VarRef, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'name = value'")
        name, _, val = line.partition("=")
        try:
            ref = parse_var_name(name.strip())
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        try:
            number = float(val.strip())
        except ValueError:
            raise ValueError(f"line {lineno}: malformed value {val.strip()!r}")
        out[ref] = number
    return out


def load_external_solution(path, instance: Instance, arcs: ArcSets | None = None) -> Solution:
    """Import an external solver's assignment, zero-filling omitted variables.

    Binary values within 1e-6 of an integer are snapped to it; anything
    further off is kept as-is for the validator to reject.
    """
    if arcs is None:
        arcs = build_arcs(instance)
    with open(path, "r", encoding="utf-8") as fh:
        parsed = parse_external_solution(fh.read())
    values = {ref: 0 for ref in variable_universe(instance, arcs)}
    for ref, val in parsed.items():
        if ref not in values:
            raise ValueError(f"variable {ref.name} does not belong to this instance")
        if ref.kind != "e" and abs(val - round(val)) <= 1e-6:
            values[ref] = int(round(val))
        else:
            values[ref] = val
    return Solution(values=values, provenance="external", wall_time_s=0.0)
