"""CSV/JSON artifacts written and read by the commands.

Floats are written with 17 significant digits so a write/read cycle is exact.
"""

import json
from pathlib import Path
from typing import Any, Mapping, Union

import numpy as np

from gcss.physics.autocorr import Trace
from gcss.physics.errors import ConfigurationError
from gcss.physics.fock import FockDensity
from gcss.physics.qspec import PnHistogram, ShotBatch
from gcss.physics.shg import ShgSystem, ShgTrajectory
from gcss.physics.wigner import PhaseGrid, WignerField

PathLike = Union[str, Path]
FLOAT_FORMAT = "%.17g"


def _prepare(path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_columns(path: PathLike, names, columns) -> Path:
    """Numeric table with a one-line header of column names."""
    path = _prepare(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns]) if len(columns[0]) else np.empty((0, len(names)))
    np.savetxt(path, data, fmt=FLOAT_FORMAT, delimiter=",", header=",".join(names), comments="")
    return path


def read_columns(path: PathLike, required) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    with path.open() as handle:
        header = handle.readline().strip().split(",")
    missing = [name for name in required if name not in header]
    if missing:
        raise ConfigurationError(f"{path}: missing columns {missing}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        data = np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(payload: Mapping[str, Any], path: PathLike) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")
    return path


def read_json(path: PathLike) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    return json.loads(path.read_text())


def write_trace_csv(tr: Trace, path: PathLike) -> Path:
    return write_columns(path, ("tau_fs", "value", "sigma"), (tr.delays, tr.values, tr.sigma))


def read_trace_csv(path: PathLike) -> Trace:
    columns = read_columns(path, ("tau_fs", "value"))
    return Trace(columns["tau_fs"], columns["value"], columns.get("sigma"))


def write_trace_json(tr: Trace, path: PathLike) -> Path:
    return write_json(
        {"tau_fs": tr.delays.tolist(), "value": tr.values.tolist(), "sigma": tr.sigma.tolist(), "uniform": tr.uniform},
        path,
    )


def read_trace_json(path: PathLike) -> Trace:
    payload = read_json(path)
    return Trace(payload["tau_fs"], payload["value"], payload.get("sigma"), payload.get("uniform"))


def write_wigner_csv(w: WignerField, path: PathLike) -> Path:
    """Matrix layout: the header row holds the p axis, each row starts with its x value."""
    path = _prepare(path)
    header = "x\\p," + ",".join(FLOAT_FORMAT % p for p in w.grid.p)
    data = np.column_stack([w.grid.x, w.values])
    np.savetxt(path, data, fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="")
    return path


def read_wigner_csv(path: PathLike) -> WignerField:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"file not found: {path}")
    with path.open() as handle:
        header = handle.readline().strip().split(",")
    if header[0] != "x\\p":
        raise ConfigurationError(f"{path}: not a Wigner matrix file")
    p = np.array(header[1:], dtype=float)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = data[:, 0]
    grid = PhaseGrid(
        center=(0.5 * (x[0] + x[-1]), 0.5 * (p[0] + p[-1])),
        half_width_x=0.5 * (x[-1] - x[0]),
        half_width_p=0.5 * (p[-1] - p[0]),
        nx=x.size,
        n_p=p.size,
    )
    return WignerField(grid, data[:, 1:])


def write_density_csv(rho: FockDensity, path: PathLike) -> Path:
    """Long format: n, m, Re rho_nm, Im rho_nm."""
    n, m = np.indices(rho.matrix.shape)
    return write_columns(
        path, ("n", "m", "re", "im"), (n.ravel(), m.ravel(), rho.matrix.real.ravel(), rho.matrix.imag.ravel())
    )


def read_density_csv(path: PathLike) -> FockDensity:
    columns = read_columns(path, ("n", "m", "re", "im"))
    size = int(columns["n"].max()) + 1
    matrix = np.zeros((size, size), dtype=np.complex128)
    matrix[columns["n"].astype(int), columns["m"].astype(int)] = columns["re"] + 1j * columns["im"]
    return FockDensity(matrix)


def write_trajectory_json(traj: ShgTrajectory, system: ShgSystem, path: PathLike, extra: Mapping[str, Any] = None) -> Path:
    payload = traj.as_dict()
    payload["system"] = {
        "n_max_w": system.n_max_w,
        "n_max_2w": system.n_max_2w,
        "chi": system.chi,
        "t_final": system.t_final,
        "interaction": system.interaction,
    }
    payload.update(extra or {})
    return write_json(payload, path)


def write_shots_csv(batch: ShotBatch, path: PathLike, with_truth: bool = False) -> Path:
    """s_ir, s_hh and the monitor reading s_0; truth columns only on request."""
    names = ["s_ir", "s_hh"]
    columns = [batch.s_ir, batch.s_hh]
    if batch.s_0 is not None:
        names.append("s_0")
        columns.append(batch.s_0)
    if with_truth:
        if not batch.has_truth:
            raise ConfigurationError("batch carries no truth columns")
        names += ["is_hhg_event", "ir_loss"]
        columns += [batch.is_hhg_event.astype(float), batch.ir_loss]
    return write_columns(path, names, columns)


def read_shots_csv(path: PathLike, b_ir: float = 1.0) -> ShotBatch:
    columns = read_columns(path, ("s_ir", "s_hh"))
    events = columns.get("is_hhg_event")
    return ShotBatch(
        columns["s_ir"],
        columns["s_hh"],
        columns.get("s_0"),
        None if events is None else events.astype(bool),
        columns.get("ir_loss"),
        b_ir=b_ir,
    )


def write_histogram_csv(hist: PnHistogram, path: PathLike) -> Path:
    return write_columns(
        path, ("bin_low", "bin_high", "center", "probability"),
        (hist.edges[:-1], hist.edges[1:], hist.centers, hist.probabilities),
    )


def read_histogram_csv(path: PathLike) -> PnHistogram:
    columns = read_columns(path, ("bin_low", "bin_high", "probability"))
    edges = np.append(columns["bin_low"], columns["bin_high"][-1:])
    return PnHistogram(edges, columns["probability"])


__all__ = [
    'write_columns',
    'read_columns',
    'write_json',
    'read_json',
    'write_trace_csv',
    'read_trace_csv',
    'write_trace_json',
    'read_trace_json',
    'write_wigner_csv',
    'read_wigner_csv',
    'write_density_csv',
    'read_density_csv',
    'write_trajectory_json',
    'write_shots_csv',
    'read_shots_csv',
    'write_histogram_csv',
    'read_histogram_csv',
]
