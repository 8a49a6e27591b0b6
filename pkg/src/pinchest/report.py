"""CSV and SVG artifacts for experiment results.

The CSV is the canonical output: a ``#`` metadata block (seed, config hash,
trials, exclusion rates) followed by a header row and one row per axis
point. The SVG figure is rendered purely from a written CSV so the plot can
never disagree with the data file. Rendering avoids wall-clock metadata and
uses a fixed hash salt, keeping artifacts stable for identical inputs.
"""

from __future__ import annotations

import csv
import io
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .config import ExperimentConfig, config_digest
from .experiments import ExperimentResult

_AXIS_LABELS = {
    "snr_db": "transmit SNR (dB)",
    "beta": "pass-through coefficient beta",
    "pa_index": "PA index",
}


def _fmt(x) -> str:
    return repr(float(x))


def result_csv_text(result: ExperimentResult, cfg: ExperimentConfig) -> str:
    """Render a result to CSV text (metadata comments + header + rows)."""
    buf = io.StringIO()
    buf.write(f"# experiment={result.experiment}\n")
    buf.write(f"# seed={result.seed}\n")
    buf.write(f"# trials={result.trials}\n")
    buf.write(f"# config_sha256={config_digest(cfg)}\n")
    for name in result.series_names:
        rates = result.exclusion.get(name, [])
        worst = max(rates) if rates else 0.0
        buf.write(f"# exclusion_rate[{name}]={_fmt(worst)}\n")
        kappas = result.kappa.get(name, [])
        if kappas:
            buf.write(
                f"# kappa_range[{name}]={_fmt(min(kappas))}..{_fmt(max(kappas))}\n"
            )
    writer = csv.writer(buf, lineterminator="\n")
    header = [result.axis_name]
    for name in result.series_names:
        header.append(f"{name}_db")
        if result.stderr_db:
            header.append(f"{name}_stderr_db")
    writer.writerow(header)
    for i, x in enumerate(result.axis):
        row = [_fmt(x)]
        for name in result.series_names:
            row.append(_fmt(result.series[name][i]))
            if result.stderr_db:
                row.append(_fmt(result.stderr_db[name][i]))
        writer.writerow(row)
    return buf.getvalue()


def write_result_csv(result: ExperimentResult, cfg: ExperimentConfig, path) -> None:
    text = result_csv_text(result, cfg)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_result_csv(path):
    """Parse a result CSV back into (metadata, column dict)."""
    meta = {}
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
                continue
            cells = next(csv.reader([line]))
            if header is None:
                header = cells
            else:
                rows.append([float(c) for c in cells])
    if header is None:
        raise ValueError(f"no header row in {path}")
    columns = {name: [row[j] for row in rows] for j, name in enumerate(header)}
    return meta, columns


def render_svg(csv_path, svg_path) -> None:
    """Line plot of every data series in a result CSV, written as SVG."""
    meta, columns = read_result_csv(csv_path)
    header = list(columns)
    axis_name = header[0]
    axis = columns[axis_name]
    experiment = meta.get("experiment", "experiment")
    value_label = "received power (dB)" if axis_name == "pa_index" else "NMSE (dB)"

    with plt.rc_context({"svg.hashsalt": "pinchest", "figure.figsize": (7.0, 5.0)}):
        fig, ax = plt.subplots()
        for name in header[1:]:
            if name.endswith("_stderr_db"):
                continue
            ax.plot(axis, columns[name], marker="o", markersize=4,
                    label=name.removesuffix("_db"))
        ax.set_xlabel(_AXIS_LABELS.get(axis_name, axis_name))
        ax.set_ylabel(value_label)
        ax.set_title(experiment.replace("_", " "))
        ax.grid(True, alpha=0.3, linestyle=":")
        ax.legend(fontsize=9)
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)


def transfer_vector_csv_text(g) -> str:
    """CSV rows (index, real, imag, magnitude_db) for one transfer vector."""
    from .waveguide import ZERO_POWER_DB

    lines = ["index,real,imag,magnitude_db"]
    for i, value in enumerate(g, start=1):
        value = complex(value)
        mag = abs(value)
        mag_db = 20.0 * math.log10(mag) if mag > 0 else ZERO_POWER_DB
        lines.append(f"{i},{_fmt(value.real)},{_fmt(value.imag)},{_fmt(mag_db)}")
    return "\n".join(lines) + "\n"


def summary_table(result: ExperimentResult) -> str:
    """Per-series min/max of the dB values plus the condition number range."""
    lines = [f"{'series':<24}{'min dB':>12}{'max dB':>12}{'kappa min':>14}{'kappa max':>14}"]
    for name in result.series_names:
        vals = [v for v in result.series[name] if math.isfinite(v)]
        kappas = result.kappa.get(name, [])
        lo = f"{min(vals):12.3f}" if vals else f"{'n/a':>12}"
        hi = f"{max(vals):12.3f}" if vals else f"{'n/a':>12}"
        klo = f"{min(kappas):14.4g}" if kappas else f"{'n/a':>14}"
        khi = f"{max(kappas):14.4g}" if kappas else f"{'n/a':>14}"
        lines.append(f"{name:<24}{lo}{hi}{klo}{khi}")
    return "\n".join(lines)
