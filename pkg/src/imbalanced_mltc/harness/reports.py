"""Report emitters: metric tables, sweep series and margin reports.

Every emitter returns bytes and is a pure function of its input, so two
runs with the same configuration write identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from ..metrics import LOWER_IS_BETTER, METRICS
from .experiment import ExperimentResult, ResultsTable, SweepSeries

COLUMNS = ("br", "lp", "adaboost_mh", "bagging_br", "bagging_lp")
COLUMN_TITLES = {
    "br": "BR",
    "lp": "LP",
    "adaboost_mh": "AdaBoost.MH",
    "bagging_br": "Bagging.ML(BR)",
    "bagging_lp": "Bagging.ML(LP)",
}
METRIC_TITLES = {
    "hamming_loss": "Hamming loss",
    "subset_accuracy": "Subset accuracy",
    "example_accuracy": "Example-based accuracy",
    "micro_f1": "Micro-averaged F1",
}
FORMATS = ("text", "csv", "jsonl")
NA = "N/A"


def outperforms(table: ResultsTable, weak: str, algorithm: str) -> bool:
    """True when the cell beats the better of the row's two baselines."""
    if algorithm in ("br", "lp"):
        return False
    value = table.value(weak, algorithm)
    baselines = [v for v in (table.value(weak, "br"), table.value(weak, "lp")) if v is not None]
    if value is None or not baselines:
        return False
    if table.metric in LOWER_IS_BETTER:
        return value < min(baselines)
    return value > max(baselines)


def _text_table(table: ResultsTable) -> str:
    header = ["weak"] + [COLUMN_TITLES[c] for c in COLUMNS]
    rows = [header]
    for weak in table.rows:
        row = [weak]
        for algo in COLUMNS:
            v = table.value(weak, algo)
            if v is None:
                row.append(NA)
            else:
                row.append(f"{v:.4f}" + ("*" if outperforms(table, weak, algo) else ""))
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    direction = "lower is better" if table.metric in LOWER_IS_BETTER else "higher is better"
    lines = [f"{METRIC_TITLES.get(table.metric, table.metric)} ({direction})"]
    for r in rows:
        lines.append("  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(r, widths))).rstrip())
    lines.append("* beats the better of BR and LP in its row")
    return "\n".join(lines) + "\n"


def _csv_table(table: ResultsTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["metric", "weak", *COLUMNS])
    for weak in table.rows:
        cells = [table.value(weak, a) for a in COLUMNS]
        writer.writerow([table.metric, weak, *(NA if v is None else repr(v) for v in cells)])
    return buf.getvalue()


def _jsonl_table(table: ResultsTable) -> str:
    lines = []
    for weak in table.rows:
        record = {"metric": table.metric, "weak": weak}
        record.update({a: table.value(weak, a) for a in COLUMNS})
        lines.append(json.dumps(record, sort_keys=False))
    return "\n".join(lines) + "\n"


def emit_table(table: ResultsTable, format: str = "text") -> bytes:
    if format == "text":
        return _text_table(table).encode("utf-8")
    if format == "csv":
        return _csv_table(table).encode("utf-8")
    if format == "jsonl":
        return _jsonl_table(table).encode("utf-8")
    raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")


def emit_sweep(sweeps: SweepSeries) -> bytes:
    """Plot-ready CSV: one row per (series, weak, iteration).

    Baselines appear as flat lines over 1..T.  A boosting run that stopped
    early simply has fewer rows.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "weak", "iteration", *METRICS])
    order = {a: i for i, a in enumerate(COLUMNS)}
    for (algo, weak), report in sorted(sweeps.baselines.items(), key=lambda kv: (kv[0][1], order[kv[0][0]])):
        for t in range(1, sweeps.iterations + 1):
            writer.writerow([f"baseline_{algo}", weak, t, *(repr(report.metric(m)) for m in METRICS)])
    for (algo, weak), reports in sorted(sweeps.series.items(), key=lambda kv: (kv[0][1], order[kv[0][0]])):
        for t, report in enumerate(reports, start=1):
            writer.writerow([algo, weak, t, *(repr(report.metric(m)) for m in METRICS)])
    return buf.getvalue().encode("utf-8")


def emit_margins(result: ExperimentResult) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["approach", "baseline", "weak", "rank", "label_id", "label", "training_count",
         "baseline_accuracy", "approach_accuracy", "margin"]
    )
    for entry in result.margins:
        for rank, row in enumerate(entry.report.rows, start=1):
            writer.writerow([
                entry.approach, entry.baseline, entry.weak, rank, row.label_id,
                result.space.name_of(row.label_id), row.training_count,
                repr(row.baseline_accuracy), repr(row.approach_accuracy), repr(row.margin),
            ])
    return buf.getvalue().encode("utf-8")


def emit_summary(result: ExperimentResult) -> bytes:
    """All four tables as text, plus a footer about the run."""
    cfg = result.config
    parts = [
        f"train documents: {result.train_size}, test documents: {result.test_size}, "
        f"labels: {result.space.Q}, features: {cfg.pipeline.feature_count}, iterations: {cfg.iterations}\n"
    ]
    parts += [emit_table(result.tables[m], "text").decode("utf-8") for m in METRICS]
    footer = ["Sweeps truncate one trained ensemble to its first t rounds or members."]
    for algo, weak in result.sweeps.stopped_early:
        n = len(result.sweeps.series[(algo, weak)])
        footer.append(f"{algo}/{weak} stopped early after {n} of {cfg.iterations} rounds; its sweep is shorter.")
    parts.append("\n".join(footer) + "\n")
    return "\n".join(parts).encode("utf-8")


_EXTENSIONS = {"text": "txt", "csv": "csv", "jsonl": "jsonl"}


def write_reports(result: ExperimentResult, out_dir, format: str = "text") -> list[Path]:
    """Write tables, sweep and margins into ``out_dir``; returns the paths written."""
    if format not in FORMATS:
        raise ValueError(f"unknown report format {format!r}; expected one of {FORMATS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {f"table_{m}.{_EXTENSIONS[format]}": emit_table(result.tables[m], format) for m in METRICS}
    files["sweep.csv"] = emit_sweep(result.sweeps)
    files["margins.csv"] = emit_margins(result)
    files["summary.txt"] = emit_summary(result)
    written = []
    for name, data in files.items():
        path = out / name
        path.write_bytes(data)
        written.append(path)
    return written
