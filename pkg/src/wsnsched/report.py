"""Schedule visualization and the experiment table harness.

SVG output is assembled from strings with fixed two-decimal coordinates
and a fixed palette, so rendering the same solution twice yields the same
bytes.  The experiment runner validates every solution it aggregates and
refuses to produce a table from anything infeasible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .instance import Instance, build_arcs, scenario_instance
from .model import VarRef
from .solve import SolveConfig, solve_exact, solve_heuristic
from .validate import check_feasibility, evaluate

EXPERIMENT_FORMAT = "wsn-experiment/1"

CSV_COLUMNS = (
    "periods", "type",
    "objective_mean", "objective_std",
    "real_objective_mean", "real_objective_std",
    "uncovered_rate_mean", "uncovered_rate_std",
    "time_mean_s", "time_std_s",
    "n",
)

_MARGIN = 40.0
_CANVAS = 560.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Scene:
    """World-to-pixel transform plus an element buffer."""

    def __init__(self, instance: Instance):
        w, h = instance.area
        self.scale = _CANVAS / max(w, h)
        self.width = w * self.scale + 2 * _MARGIN
        self.height = h * self.scale + 2 * _MARGIN
        self.world_h = h
        self.parts: list[str] = []

    def px(self, x: float, y: float) -> tuple[float, float]:
        # SVG y grows downward; world y grows upward.
        return (_MARGIN + x * self.scale, _MARGIN + (self.world_h - y) * self.scale)

    def add(self, element: str) -> None:
        self.parts.append(element)

    def circle(self, x: float, y: float, radius_px: float, style: str) -> None:
        cx, cy = self.px(x, y)
        self.add(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(radius_px)}" {style}/>')

    def square(self, x: float, y: float, half: float, style: str) -> None:
        cx, cy = self.px(x, y)
        self.add(f'<rect x="{_fmt(cx - half)}" y="{_fmt(cy - half)}" '
                 f'width="{_fmt(2 * half)}" height="{_fmt(2 * half)}" {style}/>')

    def triangle(self, x: float, y: float, half: float, style: str) -> None:
        cx, cy = self.px(x, y)
        pts = (f"{_fmt(cx)},{_fmt(cy - half)} {_fmt(cx - half)},{_fmt(cy + half)} "
               f"{_fmt(cx + half)},{_fmt(cy + half)}")
        self.add(f'<polygon points="{pts}" {style}/>')

    def line(self, x1, y1, x2, y2, style: str) -> None:
        ax, ay = self.px(x1, y1)
        bx, by = self.px(x2, y2)
        self.add(f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" '
                 f'y2="{_fmt(by)}" {style}/>')

    def arrow(self, x1, y1, x2, y2, color: str) -> None:
        ax, ay = self.px(x1, y1)
        bx, by = self.px(x2, y2)
        self.add(f'<line x1="{_fmt(ax)}" y1="{_fmt(ay)}" x2="{_fmt(bx)}" '
                 f'y2="{_fmt(by)}" stroke="{color}" stroke-width="2" stroke-opacity="0.85"/>')
        # Arrowhead: a small triangle just short of the head endpoint.
        dx, dy = bx - ax, by - ay
        length = math.hypot(dx, dy)
        if length < 1e-9:
            return
        ux, uy = dx / length, dy / length
        tipx, tipy = bx - 6.0 * ux, by - 6.0 * uy
        basex, basey = bx - 14.0 * ux, by - 14.0 * uy
        px_, py_ = -uy, ux
        pts = (f"{_fmt(tipx)},{_fmt(tipy)} "
               f"{_fmt(basex + 4.0 * px_)},{_fmt(basey + 4.0 * py_)} "
               f"{_fmt(basex - 4.0 * px_)},{_fmt(basey - 4.0 * py_)}")
        self.add(f'<polygon points="{pts}" fill="{color}" fill-opacity="0.85"/>')

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
                f'width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
                f'viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">')
        body = "\n".join(f"  {p}" for p in self.parts)
        return f"{head}\n{body}\n</svg>\n"


def _source_color(l: int) -> str:
    hue = (l * 137.508) % 360.0
    return f"hsl({hue:.1f},65%,42%)"


def _values_of(solution) -> dict:
    # Accept either a Solution-like object or a bare {VarRef: value} dict.
    if isinstance(solution, dict):
        return solution
    return solution.values


def _check_view(instance: Instance, t: int, g: int) -> None:
    if not 0 <= t < instance.periods:
        raise ValueError(f"period {t} out of range 0..{instance.periods - 1}")
    if not 0 <= g < len(instance.phenomena):
        raise ValueError(f"phenomenon index {g} out of range 0..{len(instance.phenomena) - 1}")


def _frame(scene: _Scene, instance: Instance) -> None:
    w, h = instance.area
    scene.add(f'<rect x="0" y="0" width="{_fmt(scene.width)}" '
              f'height="{_fmt(scene.height)}" fill="#ffffff"/>')
    ox, oy = scene.px(0.0, h)
    scene.add(f'<rect x="{_fmt(ox)}" y="{_fmt(oy)}" width="{_fmt(w * scene.scale)}" '
              f'height="{_fmt(h * scene.scale)}" fill="none" stroke="#444" stroke-width="1"/>')


def render_schedule(instance: Instance, solution, t: int, g: int) -> str:
    """SVG: who senses phenomenon ``g`` in period ``t`` and what is covered.

    Sensing sensors are dark squares with their coverage disk, active
    non-sensing sensors gray, inactive ones hollow; demand dots are filled
    when covered, hollow red when the penalty is taken.
    """
    _check_view(instance, t, g)
    values = _values_of(solution)
    scene = _Scene(instance)
    _frame(scene, instance)
    radius_px = instance.phenomena[g].coverage_radius * scene.scale
    gid = instance.phenomena[g].id

    for i, p in enumerate(instance.sensors):
        if values.get(VarRef("r", (i, t, g)), 0):
            scene.circle(p.x, p.y, radius_px,
                         'fill="#4f8edd" fill-opacity="0.07" stroke="#4f8edd" '
                         'stroke-opacity="0.35" stroke-width="1"')
    for j, dp in enumerate(instance.demand_points):
        if gid not in dp.demands:
            continue
        if values.get(VarRef("h", (j, t, g)), 0):
            style = 'fill="#ffffff" stroke="#cc3333" stroke-width="1.5"'
        else:
            style = 'fill="#222222"'
        scene.circle(dp.position.x, dp.position.y, 3.0, style)
    for i, p in enumerate(instance.sensors):
        sensing = values.get(VarRef("r", (i, t, g)), 0)
        active = values.get(VarRef("y", (i, t)), 0)
        if sensing:
            style = 'fill="#2a7de1" stroke="#1b4f91" stroke-width="1"'
        elif active:
            style = 'fill="#9db8d9" stroke="#5c7699" stroke-width="1"'
        else:
            style = 'fill="#ffffff" stroke="#888888" stroke-width="1"'
        scene.square(p.x, p.y, 5.0, style)
    for m in instance.sinks:
        scene.triangle(m.x, m.y, 7.0, 'fill="#111111"')
    return scene.render()


def route_edges(solution, t: int, g: int) -> tuple[tuple[int, int, int], ...]:
    """(source, tail, head) triples of every arc carrying a stream at (t, g)."""
    values = _values_of(solution)
    edges = []
    for ref, val in values.items():
        if ref.kind == "z" and val:
            l, a, b, tt, gg = ref.indices
            if tt == t and gg == g:
                edges.append((l, a, b))
    return tuple(sorted(edges))


def render_routes(instance: Instance, solution, t: int, g: int) -> str:
    """SVG: the routing forest for phenomenon ``g`` in period ``t``.

    Every stream is drawn in its source's color, arrowheads pointing at
    the receiving node; sinks are black triangles.
    """
    _check_view(instance, t, g)
    values = _values_of(solution)
    scene = _Scene(instance)
    _frame(scene, instance)
    n = len(instance.sensors)

    def node_pos(node: int):
        if node < n:
            p = instance.sensors[node]
        else:
            p = instance.sinks[node - n]
        return p.x, p.y

    for (l, a, b) in route_edges(solution, t, g):
        ax, ay = node_pos(a)
        bx, by = node_pos(b)
        scene.arrow(ax, ay, bx, by, _source_color(l))
    for i, p in enumerate(instance.sensors):
        if values.get(VarRef("r", (i, t, g)), 0):
            style = f'fill="{_source_color(i)}" stroke="#333333" stroke-width="1"'
        elif values.get(VarRef("y", (i, t)), 0):
            style = 'fill="#9db8d9" stroke="#5c7699" stroke-width="1"'
        else:
            style = 'fill="#ffffff" stroke="#888888" stroke-width="1"'
        scene.square(p.x, p.y, 4.0, style)
    for m in instance.sinks:
        scene.triangle(m.x, m.y, 7.0, 'fill="#111111"')
    return scene.render()


def save_views(instance: Instance, solution, outdir, kinds=("schedule", "routes"),
               periods=None, phenomena=None) -> list[str]:
    """Write plan_t{t}_g{g}.svg / routes_t{t}_g{g}.svg files; returns paths."""
    import os

    from .ioutil import atomic_write_text

    ts = range(instance.periods) if periods is None else list(periods)
    gs = range(len(instance.phenomena)) if phenomena is None else list(phenomena)
    written = []
    os.makedirs(outdir, exist_ok=True)
    for t in ts:
        for g in gs:
            if "schedule" in kinds:
                path = os.path.join(outdir, f"plan_t{t}_g{g}.svg")
                atomic_write_text(path, render_schedule(instance, solution, t, g))
                written.append(path)
            if "routes" in kinds:
                path = os.path.join(outdir, f"routes_t{t}_g{g}.svg")
                atomic_write_text(path, render_routes(instance, solution, t, g))
                written.append(path)
    return written


# -- experiment harness ------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentSpec:
    """One table's worth of runs: layout types x period counts x seeds."""

    types: tuple[str, ...] = ("grid", "random")
    periods: tuple[int, ...] = (1, 2, 3)
    seeds: tuple[int, ...] = tuple(range(1, 11))
    solver: str = "heuristic"  # "heuristic" | "exact"
    scenario: str = "bench1"
    time_limit_s: float = 60.0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        object.__setattr__(self, "periods", tuple(self.periods))
        object.__setattr__(self, "seeds", tuple(self.seeds))
        for kind in self.types:
            if kind not in ("grid", "random"):
                raise ValueError(f"unknown layout type {kind!r}")
        if self.solver not in ("heuristic", "exact"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ExperimentRow:
    periods: int
    type: str
    objective_mean: float
    objective_std: float
    real_objective_mean: float
    real_objective_std: float
    uncovered_rate_mean: float
    uncovered_rate_std: float
    time_mean_s: float
    time_std_s: float
    n: int


def spec_from_json(data: dict) -> ExperimentSpec:
    if data.get("format") != EXPERIMENT_FORMAT:
        raise ValueError(f"unsupported experiment format {data.get('format')!r}")
    kwargs = {}
    for key in ("types", "periods", "seeds"):
        if key in data:
            kwargs[key] = tuple(data[key])
    for key in ("solver", "scenario", "time_limit_s", "workers"):
        if key in data:
            kwargs[key] = data[key]
    return ExperimentSpec(**kwargs)


def spec_to_json(spec: ExperimentSpec) -> dict:
    return {
        "format": EXPERIMENT_FORMAT,
        "types": list(spec.types),
        "periods": list(spec.periods),
        "seeds": list(spec.seeds),
        "solver": spec.solver,
        "scenario": spec.scenario,
        "time_limit_s": spec.time_limit_s,
        "workers": spec.workers,
    }


def load_spec(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return spec_from_json(json.load(fh))


def _one_run(spec: ExperimentSpec, kind: str, periods: int, seed: int):
    instance = scenario_instance(spec.scenario, kind=kind, periods=periods, seed=seed)
    arcs = build_arcs(instance)
    if spec.solver == "heuristic":
        solution = solve_heuristic(instance, arcs)
    else:
        solution, _certificate = solve_exact(
            instance, arcs, config=SolveConfig(time_limit_s=spec.time_limit_s)
        )
    violations = check_feasibility(instance, arcs, solution)
    if violations:
        raise RuntimeError(
            f"solver {spec.solver!r} produced an infeasible solution on "
            f"{kind}/T={periods}/seed={seed}: {violations[0].tag}"
        )
    metrics = evaluate(instance, solution, arcs)
    if metrics.objective != metrics.real_objective + metrics.penalty_total:
        raise RuntimeError("objective accounting identity broken")
    return metrics, solution.wall_time_s


def run_experiment(spec: ExperimentSpec, log=None) -> list[ExperimentRow]:
    """Solve every cell of the table and aggregate with population stddev.

    Grid layouts are deterministic, so their cells run once (n=1); random
    layouts run once per seed.  Every solution is re-validated before it
    is counted; an infeasible one aborts the whole experiment.
    """
    rows = []
    for kind in spec.types:
        for periods in spec.periods:
            seeds = spec.seeds if kind == "random" else (0,)
            jobs = [(spec, kind, periods, seed) for seed in seeds]
            if spec.workers > 1 and len(jobs) > 1:
                with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                    results = list(pool.map(lambda args: _one_run(*args), jobs))
            else:
                results = [_one_run(*args) for args in jobs]
            objectives = [m.objective for m, _ in results]
            reals = [m.real_objective for m, _ in results]
            rates = [m.uncovered_rate for m, _ in results]
            times = [wall for _, wall in results]
            row = ExperimentRow(
                periods=periods,
                type=kind,
                objective_mean=statistics.fmean(objectives),
                objective_std=statistics.pstdev(objectives),
                real_objective_mean=statistics.fmean(reals),
                real_objective_std=statistics.pstdev(reals),
                uncovered_rate_mean=statistics.fmean(rates),
                uncovered_rate_std=statistics.pstdev(rates),
                time_mean_s=statistics.fmean(times),
                time_std_s=statistics.pstdev(times),
                n=len(results),
            )
            rows.append(row)
            if log is not None:
                log(f"{kind:>6}  T={periods}  n={row.n}  "
                    f"objective={row.objective_mean:.2f}  "
                    f"uncovered={100 * row.uncovered_rate_mean:.2f}%")
    return rows


def rows_to_csv(rows) -> str:
    """Serialize rows losslessly (floats via repr)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([
            row.periods, row.type,
            repr(row.objective_mean), repr(row.objective_std),
            repr(row.real_objective_mean), repr(row.real_objective_std),
            repr(row.uncovered_rate_mean), repr(row.uncovered_rate_std),
            repr(row.time_mean_s), repr(row.time_std_s),
            row.n,
        ])
    return buf.getvalue()


def csv_to_rows(text: str) -> list[ExperimentRow]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = []
    for record in reader:
        if not record:
            continue
        if len(record) != len(CSV_COLUMNS):
            raise ValueError(f"CSV row has {len(record)} fields, expected {len(CSV_COLUMNS)}")
        rows.append(ExperimentRow(
            periods=int(record[0]),
            type=record[1],
            objective_mean=float(record[2]),
            objective_std=float(record[3]),
            real_objective_mean=float(record[4]),
            real_objective_std=float(record[5]),
            uncovered_rate_mean=float(record[6]),
            uncovered_rate_std=float(record[7]),
            time_mean_s=float(record[8]),
            time_std_s=float(record[9]),
            n=int(record[10]),
        ))
    return rows


def save_rows(rows, path) -> None:
    from .ioutil import atomic_write_text

    atomic_write_text(path, rows_to_csv(rows))
