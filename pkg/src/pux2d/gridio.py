"""File formats for grid fields and result tables.

The binary grid format is a 24-byte header followed by the row-major float64
payload: int64 grid size per side, float64 box half-side, uint64 CRC32 of the
payload bytes (zero-extended). Rows run over the x index.
"""

import struct
import zlib

import numpy as np

_HEADER = struct.Struct("<qdQ")

_PROVENANCE_NAMES = {0: "zero", 1: "inside", 2: "extended"}


def write_field_csv(path, field):
    """Extension field as CSV rows (x, y, value, provenance)."""
    ax = field.grid.axis()
    with open(path, "w") as fh:
        fh.write("x,y,value,provenance\n")
        for ix in range(field.grid.n):
            for iy in range(field.grid.n):
                fh.write(
                    f"{float(ax[ix])!r},{float(ax[iy])!r},{float(field.values[ix, iy])!r},"
                    f"{_PROVENANCE_NAMES[int(field.provenance[ix, iy])]}\n"
                )


def write_grid_binary(path, values, box_half):
    values = np.ascontiguousarray(values, dtype=np.float64)
    payload = values.tobytes()
    header = _HEADER.pack(values.shape[0], float(box_half), zlib.crc32(payload))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_grid_binary(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    n, box_half, crc = _HEADER.unpack_from(raw)
    payload = raw[_HEADER.size:]
    if zlib.crc32(payload) != crc:
        raise ValueError(f"checksum mismatch in {path}")
    values = np.frombuffer(payload, dtype=np.float64).reshape(n, n)
    return values.copy(), box_half


def write_classification_csv(path, grid, mask):
    ax = grid.axis()
    inside = mask.inside.reshape(grid.n, grid.n)
    indicator = mask.indicator.reshape(grid.n, grid.n)
    with open(path, "w") as fh:
        fh.write("x,y,indicator,label\n")
        for ix in range(grid.n):
            for iy in range(grid.n):
                label = "inside" if inside[ix, iy] else "outside"
                fh.write(
                    f"{float(ax[ix])!r},{float(ax[iy])!r},{float(indicator[ix, iy])!r},{label}\n"
                )


def write_solution_csv(path, result):
    n = result.u_eval.shape[0]
    ax = -result.config.box_half + 2 * result.config.box_half * np.arange(n) / n
    with open(path, "w") as fh:
        fh.write("x,y,u\n")
        ii, jj = np.nonzero(result.eval_inside)
        for i, j in zip(ii, jj):
            fh.write(f"{float(ax[i])!r},{float(ax[j])!r},{float(result.u_eval[i, j])!r}\n")


def write_metrics_csv(path, report):
    with open(path, "w") as fh:
        fh.write("relL2,maxRel,Nu,kTilde,M,P,betaMin\n")
        fh.write(
            f"{float(report.rel_l2)!r},{float(report.max_rel)!r},{report.n_grid},"
            f"{report.k_tilde},{report.m_centers},{float(report.points_per_radius)!r},"
            f"{float(report.beta_min)!r}\n"
        )


def write_study_csv(path, study):
    with open(path, "w") as fh:
        fh.write(study.to_csv())
