"""CSV and report emission.

All numbers are written with 9 significant digits.  Files are written to a
temporary sibling and renamed into place, so a failed command never leaves
a partial file behind.
"""

from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

import numpy as np

from .modal import ModalData

FLOAT_FMT = "%.9g"
MODE_TABLE_HEADER = ("mode", "beta", "omega", "phi_prime_0", "phi_l")


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    if isinstance(value, (complex, np.complexfloating)):
        return f"{value.real:.9g}{value.imag:+.9g}j"
    return str(value)


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, data) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(np.asarray(data, dtype=float)), fmt=FLOAT_FMT, delimiter=",",
               header=",".join(header), comments="")
    return buf.getvalue()


def trace_header(n: int, v: int) -> list:
    """Frozen column order of simulation traces."""
    return (
        ["t", "theta"] + [f"p{i}" for i in range(1, n + 1)]
        + ["dtheta"] + [f"dp{i}" for i in range(1, n + 1)]
        + ["theta_c", "theta_t", "theta_d", "sigma", "sigma_hat", "u", "g_hat1", "g_hat2"]
        + [f"e{i}" for i in range(1, v + 1)]
    )


def trace_table(result) -> np.ndarray:
    cols = [
        result.t[:, None], result.x,
        np.column_stack([result.theta_c, result.theta_t, result.theta_d,
                         result.sigma, result.sigma_hat, result.u]),
        result.g_hat, result.e,
    ]
    return np.hstack(cols)


def write_trace(path, result) -> Path:
    header = trace_header(result.n_plant, result.e.shape[1])
    return atomic_write_text(path, csv_text(header, trace_table(result)))


def mode_table(modal: ModalData) -> np.ndarray:
    return np.column_stack([
        np.arange(1, modal.n + 1), modal.betas, modal.omegas, modal.phi_prime_0, modal.phi_l,
    ])


def mode_table_text(modal: ModalData) -> str:
    body = csv_text(MODE_TABLE_HEADER, mode_table(modal)).splitlines()
    # mode index as a plain integer
    rows = [body[0]] + [",".join([str(int(float(r.split(",")[0])))] + r.split(",")[1:]) for r in body[1:]]
    return "\n".join(rows) + "\n"


def csv_blocks_text(blocks: dict) -> str:
    """Several matrices in one file, each introduced by ``# name rows x cols``."""
    out = []
    for name, mat in blocks.items():
        mat = np.asarray(mat)
        if mat.ndim == 1:
            mat = mat.reshape(-1, 1)
        out.append(f"# {name} {mat.shape[0]}x{mat.shape[1]}\n")
        buf = io.StringIO()
        np.savetxt(buf, mat, fmt=FLOAT_FMT, delimiter=",")
        out.append(buf.getvalue())
    return "".join(out)


def read_csv_blocks(path) -> dict:
    blocks, name, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if name is not None:
                blocks[name] = np.array(rows, dtype=float)
            name, rows = line[1:].split()[0], []
        else:
            if name is None:
                raise ValueError(f"{path}: data before the first '# name' header")
            rows.append([float(v) for v in line.split(",")])
    if name is not None:
        blocks[name] = np.array(rows, dtype=float)
    return blocks


def report_text(items: dict) -> str:
    """``key = value`` lines; sequences are joined with ';'."""
    lines = []
    for key, value in items.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            value = ";".join(fmt(v) for v in np.ravel(value))
        else:
            value = fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
