"""``normsched bench``: the acceptance suite plus result tables and figures."""

from __future__ import annotations

import json
import sys
from pathlib import Path

from .checks import LIMITS, Suite
from .instances import a4_completion, job_id, make_jp, make_pp_schedule
from .render import job_labels, save_gantt_png, save_line_plot
from .solver import grid_dp_solve


def _table(results) -> str:
    rows = [("#", "criterion", "status", "seconds", "limit")]
    for r in results:
        lim = LIMITS[r.number]
        rows.append((str(r.number), r.name, "PASS" if r.passed else "FAIL", f"{r.seconds:.2f}",
                     "-" if lim is None else str(lim)))
    widths = [max(len(row[i]) for row in rows) for i in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _figures(out: Path) -> list[str]:
    made = []
    ps = list(range(7))
    pp = [float(make_pp_schedule(p).completion(job_id(p, 4))) for p in ps]
    formula = [float(a4_completion(p)) for p in ps]
    save_line_plot(ps, {"constructed schedule": pp, "2p+3-1/2^(p+1)": formula}, out / "a4_completion.png",
                   "p", "completion of a_4^p", "Completion of the last level's a_4")
    made.append("a4_completion.png")
    gaps = [2 * p + 3 - c for p, c in zip(ps, pp)]
    save_line_plot(ps, {"2p+3 - C(a_4^p)": gaps}, out / "resolution.png", "p", "gap (log scale)",
                   "Finest dyadic level reached by the constructed schedules", logy=True)
    made.append("resolution.png")
    ks = list(range(5))
    series = {}
    for p in (0, 1):
        inst = make_jp(p)
        series[f"J_{p}"] = [float(grid_dp_solve(inst, k).optimal_value) for k in ks]
    save_line_plot(ks, series, out / "grid_refinement.png", "grid exponent K", "optimal total completion time",
                   "Grid oracle value against grid resolution")
    made.append("grid_refinement.png")
    for p in (0, 2):
        sched = make_pp_schedule(p)
        save_gantt_png(sched, out / f"pp_{p}_gantt.png", job_labels(make_jp(p), sched), f"Constructed schedule, p={p}")
        made.append(f"pp_{p}_gantt.png")
    return made


def run_bench(out: Path, only=range(1, 11), j1_budget=None, scale: float = 1.0, figures: bool = True,
              stream=sys.stdout) -> bool:
    out.mkdir(parents=True, exist_ok=True)
    suite = Suite(j1_budget=j1_budget, scale=scale)
    results = []
    for k in only:
        r = suite.run(k)
        results.append(r)
        print(r.line, file=stream, flush=True)
    payload = {"scale": scale, "j1_budget": suite.j1_budget, "results": [r.to_json() for r in results]}
    if figures:
        payload["figures"] = _figures(out)
    (out / "results.json").write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    table = _table(results)
    (out / "results.txt").write_text(table + "\n" + "\n".join(r.line for r in results) + "\n")
    print(table, file=stream, end="")
    return all(r.passed for r in results)
