"""Bench aggregation and report rendering.

A bench is `runs` independent generation runs over the same project; run r
uses seed base_seed + r.  Aggregates kept separate on purpose:

  * success: how many runs produced a function that passed every check;
  * avg repair rounds: mean over all runs of that run's total repair rounds,
    counting failed runs too (they spent their budget);
  * holdout pass rate: passed holdout evaluations over total holdout
    evaluations, counted only across successful generations - a function
    that never passed its generation examples says nothing about holdout
    generalization.

Every number in the report is recomputable from the per-run records, which
are written alongside it.
"""

from __future__ import annotations

import copy

CATEGORIES = ("static", "runtime", "semantic")


def build_report(contract: str, model_id: str, base_seed: int,
                 run_records: list[dict]) -> dict:
    """Aggregate per-run records into the bench report.

    Each record: {"run": r, "seed": s, "functions": {name: {
        "status", "rounds": {category: n}, "llm_calls",
        "holdout_passed", "holdout_total", "fingerprints", "timestamps"}}}
    """
    runs = len(run_records)
    names: list[str] = []
    for rec in run_records:
        for name in rec["functions"]:
            if name not in names:
                names.append(name)

    functions = {}
    skipped: list[str] = []
    categories = {c: 0 for c in CATEGORIES}
    llm_calls = 0
    for name in names:
        cells = [rec["functions"][name] for rec in run_records
                 if name in rec["functions"]]
        cells = [c for c in cells if c["status"] != "skipped"]
        if not cells:
            skipped.append(name)
            continue
        totals = [sum(c["rounds"].values()) for c in cells]
        wins = [c for c in cells if c["status"] == "success"]
        passed = sum(c["holdout_passed"] for c in wins)
        total = sum(c["holdout_total"] for c in wins)
        functions[name] = {
            "success_runs": len(wins),
            "runs": len(cells),
            "avg_repair_rounds": sum(totals) / len(cells),
            "holdout_passed": passed,
            "holdout_total": total,
            "holdout_pass_rate": (passed / total) if total else None,
        }
        for cell in cells:
            llm_calls += cell["llm_calls"]
            for cat in CATEGORIES:
                categories[cat] += cell["rounds"].get(cat, 0)

    fingerprints: list[str] = []
    timestamps: list[str] = []
    for rec in run_records:
        for cell in rec["functions"].values():
            for fp in cell.get("fingerprints", []):
                if fp and fp not in fingerprints:
                    fingerprints.append(fp)
            timestamps.extend(cell.get("timestamps", []))

    categories["total"] = sum(categories[c] for c in CATEGORIES)
    return {
        "contract": contract,
        "model_id": model_id,
        "runs": runs,
        "base_seed": base_seed,
        "functions": functions,
        "skipped": skipped,
        "categories": categories,
        "llm_calls": llm_calls,
        "provenance": {
            "seeds": [rec["seed"] for rec in run_records],
            "fingerprints": fingerprints,
            "timestamps": timestamps,
        },
    }


def scrub_timestamps(obj):
    """A deep copy with every 'timestamp'/'timestamps' key removed, so two
    documents can be compared byte for byte minus wall-clock provenance."""
    if isinstance(obj, dict):
        return {k: scrub_timestamps(v) for k, v in obj.items()
                if k not in ("timestamp", "timestamps")}
    if isinstance(obj, list):
        return [scrub_timestamps(v) for v in obj]
    return copy.deepcopy(obj)


def _rate_cell(fn: dict) -> str:
    if fn["holdout_total"] == 0:
        return "n/a"
    pct = 100 * fn["holdout_passed"] / fn["holdout_total"]
    return f"{fn['holdout_passed']}/{fn['holdout_total']} ({pct:.0f}%)"


def format_report(report: dict) -> str:
    """Aligned text rendering of a bench report."""
    rows = [("function", "success", "avg rounds", "holdout")]
    for name, fn in report["functions"].items():
        rows.append((name,
                     f"{fn['success_runs']}/{fn['runs']}",
                     f"{fn['avg_repair_rounds']:.1f}",
                     _rate_cell(fn)))
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = [f"bench: {report['contract']} (model {report['model_id']}, "
             f"{report['runs']} run(s), base seed {report['base_seed']})", ""]
    for row in rows:
        lines.append("  ".join(cell.ljust(w)
                               for cell, w in zip(row, widths)).rstrip())
    cats = report["categories"]
    lines.append("")
    lines.append("repair rounds: " + ", ".join(
        f"{c} {cats[c]}" for c in CATEGORIES) + f", total {cats['total']}")
    lines.append(f"llm calls: {report['llm_calls']}")
    if report.get("skipped"):
        lines.append("skipped (no io examples): "
                     + ", ".join(report["skipped"]))
    return "\n".join(lines) + "\n"
