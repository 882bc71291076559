import os
import types
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.components.evaluators.exposure_evaluator import mode_step_reduction_db
from src.models import (
    CpsCurve,
    ExposureMetrics,
    FrfData,
    ObserverBank,
    ReferenceTrace,
    ScanWindow,
    SimTrace,
)
from src.settings import StageConfig

# Array fields of SimTrace in CSV column order, with the naming of their channels
TRACE_FIELDS = (
    ("p", "xy"),
    ("reference", "axes"),
    ("y", "axes"),
    ("e", "axes"),
    ("u_rb", "axes"),
    ("u_ff", "axes"),
    ("u_fm", "axes"),
    ("u_tilde", "axes"),
    ("modal", "index"),
    ("q_hat", "index"),
    ("sensor_noise", "axes"),
    ("force_noise", "index"),
)


def write_csv(frame: pd.DataFrame, path: str, provenance: dict[str, str]) -> str:
    """
    Write a frame as CSV behind `# key=value` provenance lines.

    Returns:
        str: The path written.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as file:
        for key, value in provenance.items():
            file.write(f"# {key}={value}\n")
        frame.to_csv(file, index=False, lineterminator="\n")
    return path


def read_csv(path: str) -> tuple[pd.DataFrame, dict[str, str]]:
    provenance = {}
    with open(path, "r") as file:
        for line in file:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            provenance[key] = value
    return pd.read_csv(path, comment="#", keep_default_na=False), provenance


def _column_names(name: str, kind: str, width: int, axes: list[str]) -> list[str]:
    if kind == "xy":
        suffixes = ["q_x", "q_y"]
    elif kind == "axes":
        suffixes = axes
    else:
        suffixes = [str(i) for i in range(width)]
    return [f"{name}[{suffix}]" for suffix in suffixes]


def _window_columns(windows: list[ScanWindow], n_samples: int) -> dict[str, np.ndarray]:
    die = np.full(n_samples, "", dtype=object)
    scan_axis = np.full(n_samples, "", dtype=object)
    cv = np.zeros(n_samples, dtype=int)
    exposure = np.zeros(n_samples, dtype=int)
    for window in windows:
        die[window.cv_start : window.cv_stop] = window.die
        scan_axis[window.cv_start : window.cv_stop] = window.axis
        cv[window.cv_start : window.cv_stop] = 1
        exposure[window.exposure_start : window.exposure_stop] = 1
    return {"die": die, "scan_axis": scan_axis, "cv": cv, "exposure": exposure}


def _windows_from_frame(frame: pd.DataFrame) -> list[ScanWindow]:
    if "die" not in frame:
        return []
    die = frame["die"].astype(str).to_numpy()
    exposure = frame["exposure"].to_numpy().astype(bool)
    windows, start = [], None
    for k in range(len(die) + 1):
        current = die[k] if k < len(die) else ""
        if start is not None and (current != die[start]):
            lit = np.flatnonzero(exposure[start:k])
            e_start = start + int(lit[0]) if lit.size else start
            e_stop = start + int(lit[-1]) + 1 if lit.size else start
            windows.append(
                ScanWindow(
                    die=die[start],
                    axis=str(frame["scan_axis"].iloc[start]),
                    cv_start=start,
                    cv_stop=k,
                    exposure_start=e_start,
                    exposure_stop=e_stop,
                )
            )
            start = None
        if start is None and current:
            start = k
    return windows


def trace_frame(trace: SimTrace) -> pd.DataFrame:
    """Flat per-tick table of a run; per-observer predictions are not exported."""
    columns: dict[str, np.ndarray] = {"t": trace.t}
    for name, kind in TRACE_FIELDS:
        values = getattr(trace, name)
        for index, column in enumerate(_column_names(name, kind, values.shape[1], trace.axes)):
            columns[column] = values[:, index]
    columns.update(_window_columns(trace.windows, trace.n_samples))
    return pd.DataFrame(columns)


def frame_trace(frame: pd.DataFrame, provenance: dict[str, str]) -> SimTrace:
    """Inverse of trace_frame, using the label, flex flag and Ts from the provenance header."""
    axes = provenance["axes"].split(",")
    arrays = {}
    for name, _ in TRACE_FIELDS:
        selected = [c for c in frame.columns if c.startswith(f"{name}[")]
        arrays[name] = frame[selected].to_numpy(dtype=float)
    return SimTrace(
        label=provenance["label"],
        flex_enabled=provenance["flex_enabled"] == "True",
        ts=float(provenance["ts"]),
        axes=axes,
        windows=_windows_from_frame(frame),
        **arrays,
    )


def trace_provenance(trace: SimTrace, config_hash: str, design_hash: str) -> dict[str, str]:
    return {
        "config_hash": config_hash,
        "design_hash": design_hash,
        "label": trace.label,
        "flex_enabled": str(trace.flex_enabled),
        "ts": repr(trace.ts),
        "axes": ",".join(trace.axes),
    }


def reference_frame(reference: ReferenceTrace) -> pd.DataFrame:
    columns: dict[str, np.ndarray] = {"t": reference.t}
    for name in ("position", "velocity", "acceleration", "jerk", "snap"):
        values = getattr(reference, name)
        for index, axis in enumerate(reference.axes):
            columns[f"{name}[{axis}]"] = values[:, index]
    columns.update(_window_columns(reference.windows, reference.n_samples))
    return pd.DataFrame(columns)


def frf_frame(frfs: list[FrfData]) -> pd.DataFrame:
    """One row per frozen point, loop configuration and frequency; four columns per channel."""
    frames = []
    for frf in frfs:
        columns: dict[str, np.ndarray] = {
            "q_x": np.full(frf.freq_hz.size, frf.point.q_x),
            "q_y": np.full(frf.freq_hz.size, frf.point.q_y),
            "flex": np.full(frf.freq_hz.size, "on" if frf.flex_enabled else "off"),
            "freq_hz": frf.freq_hz,
        }
        _, n_out, n_in = frf.response.shape
        for o in range(n_out):
            for i in range(n_in):
                h = frf.channel(o, i)
                columns[f"re[{o},{i}]"] = h.real
                columns[f"im[{o},{i}]"] = h.imag
                columns[f"mag_db[{o},{i}]"] = 20 * np.log10(np.abs(h))
                columns[f"phase_deg[{o},{i}]"] = np.degrees(np.angle(h))
        frames.append(pd.DataFrame(columns))
    return pd.concat(frames, ignore_index=True)


def suppression_frame(frfs: list[FrfData], suppression_db: list[float]) -> pd.DataFrame:
    points = [frf.point for frf in frfs if not frf.flex_enabled]
    return pd.DataFrame(
        {
            "q_x": [p.q_x for p in points],
            "q_y": [p.q_y for p in points],
            "suppression_db": suppression_db,
        }
    )


def metrics_frame(metrics: dict[str, ExposureMetrics]) -> pd.DataFrame:
    rows = [
        {"label": label, **record.model_dump()}
        for label, result in metrics.items()
        for record in result.records
    ]
    return pd.DataFrame(rows, columns=["label", "die", "axis", "ma_peak", "msd_peak"])


def cps_frame(cps: dict[str, list[CpsCurve]]) -> pd.DataFrame:
    frames = [
        pd.DataFrame(
            {
                "label": curve.label,
                "axis": curve.axis,
                "freq_hz": curve.freq_hz,
                "psd": curve.psd,
                "cumulative": curve.cumulative,
            }
        )
        for curves in cps.values()
        for curve in curves
    ]
    return pd.concat(frames, ignore_index=True)


def comparison_table(
    metrics: dict[str, ExposureMetrics],
    cps: Optional[dict[str, list[CpsCurve]]] = None,
    band: Optional[tuple[float, float]] = None,
) -> pd.DataFrame:
    """
    Baseline against extended per die and axis: peak |MA|, peak MSD and the MSD ratio.

    With cPS curves and a band, the per-axis shrink of the cumulative-power step is added.
    """
    frame = metrics_frame({k: metrics[k] for k in ("baseline", "extended") if k in metrics})
    if frame.empty or frame["label"].nunique() < 2:
        return pd.DataFrame()
    table = frame.pivot_table(
        index=["die", "axis"], columns="label", values=["ma_peak", "msd_peak"]
    )
    table.columns = [f"{value}_{label}" for value, label in table.columns]
    table = table.reset_index()
    table["msd_ratio"] = table["msd_peak_extended"] / table["msd_peak_baseline"]
    if cps and band and "baseline" in cps and "extended" in cps:
        step = {
            off.axis: mode_step_reduction_db(off, on, band)
            for off, on in zip(cps["baseline"], cps["extended"])
        }
        table["cps_step_reduction_db"] = table["axis"].map(step)
    return table


def bank_frame(bank: ObserverBank) -> pd.DataFrame:
    """One row per local observer: grid point, then vec(L), vec(C), vec(D), row-major."""
    rows = []
    for observer in bank.observers:
        row = {"q_x": observer.point.q_x, "q_y": observer.point.q_y}
        for name, matrix in (
            ("L", observer.gain),
            ("C", observer.model.c),
            ("D", observer.model.d),
        ):
            for (r, c), value in np.ndenumerate(matrix):
                row[f"{name}[{r},{c}]"] = value
        rows.append(row)
    return pd.DataFrame(rows)


def _field_rows(model: type[BaseModel], prefix: str) -> list[tuple[str, str, str]]:
    rows = []
    for name, field in model.model_fields.items():
        key = f"{prefix}{name}"
        annotation = field.annotation
        # Python 3.10 reports parametrized generics like tuple[float, float] as types
        if (
            isinstance(annotation, type)
            and not isinstance(annotation, types.GenericAlias)
            and issubclass(annotation, BaseModel)
        ):
            rows.extend(_field_rows(annotation, f"{key}."))
            continue
        default = field.get_default(call_default_factory=True)
        if isinstance(default, BaseModel):
            default = default.model_dump(mode="json")
        elif isinstance(default, dict):
            default = {
                k: v.model_dump(mode="json") if isinstance(v, BaseModel) else v
                for k, v in default.items()
            }
        elif isinstance(default, list):
            default = [
                v.model_dump(mode="json") if isinstance(v, BaseModel) else v for v in default
            ]
        rows.append((key, repr(default), field.description or ""))
    return rows


def reference_page() -> str:
    """Markdown table of every config key with its default and description."""
    lines = [
        "# Configuration reference",
        "",
        "Every key may be overridden with `STAGECTL__<SECTION>__<KEY>=<yaml literal>`.",
        "",
        "| key | default | description |",
        "| --- | --- | --- |",
    ]
    for key, default, description in _field_rows(StageConfig, ""):
        if key.startswith("pipeline_"):
            default = "see config.yaml"
        lines.append(f"| `{key}` | `{default}` | {description} |")
    return "\n".join(lines) + "\n"
