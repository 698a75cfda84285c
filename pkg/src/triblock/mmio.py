"""Matrix Market coordinate files and block-system (de)serialization.

Supported header: ``matrix coordinate real|integer general|symmetric``.
Symmetric files are expanded to full storage on read; duplicate coordinates
are summed; indices are 1-based on disk.  Complex and pattern fields raise
UnsupportedFieldError.  A block system is stored as four .mtx files plus a
JSON sidecar holding dimensions, the right-hand side, and provenance.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import MatrixMarketError, UnsupportedFieldError
from .sparse import SparseMatrix
from .system import BlockSystem, HatBlockSystem

_HEADER = "%%MatrixMarket"


def read_matrix_market(path) -> SparseMatrix:
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        header = fh.readline()
        if not header:
            raise MatrixMarketError("empty file", line=1)
        parts = header.strip().split()
        if len(parts) != 5 or parts[0] != _HEADER or parts[1].lower() != "matrix":
            raise MatrixMarketError("malformed MatrixMarket header", line=1)
        fmt, field, symmetry = (p.lower() for p in parts[2:5])
        if fmt != "coordinate":
            raise UnsupportedFieldError(f"unsupported format {fmt!r}", line=1)
        if field in ("complex", "pattern"):
            raise UnsupportedFieldError(f"unsupported field {field!r}", line=1)
        if field not in ("real", "integer"):
            raise UnsupportedFieldError(f"unknown field {field!r}", line=1)
        if symmetry not in ("general", "symmetric"):
            raise UnsupportedFieldError(f"unsupported symmetry {symmetry!r}", line=1)

        lineno = 1
        size_line = None
        for raw in fh:
            lineno += 1
            stripped = raw.strip()
            if not stripped or stripped.startswith("%"):
                continue
            size_line = stripped
            break
        if size_line is None:
            raise MatrixMarketError("missing size line", line=lineno)
        try:
            nrows, ncols, nnz = (int(tok) for tok in size_line.split())
        except ValueError:
            raise MatrixMarketError(f"bad size line {size_line!r}",
                                    line=lineno) from None
        if nrows < 0 or ncols < 0 or nnz < 0:
            raise MatrixMarketError("negative size", line=lineno)

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        count = 0
        for raw in fh:
            lineno += 1
            stripped = raw.strip()
            if not stripped or stripped.startswith("%"):
                continue
            toks = stripped.split()
            if len(toks) != 3:
                raise MatrixMarketError(f"expected 'row col value', got {stripped!r}",
                                        line=lineno)
            if count >= nnz:
                raise MatrixMarketError("more entries than declared", line=lineno)
            try:
                r = int(toks[0])
                c = int(toks[1])
                v = float(toks[2])
            except ValueError:
                raise MatrixMarketError(f"bad entry {stripped!r}", line=lineno) from None
            if not (1 <= r <= nrows and 1 <= c <= ncols):
                raise MatrixMarketError(f"index ({r},{c}) out of range", line=lineno)
            rows[count] = r - 1
            cols[count] = c - 1
            vals[count] = v
            count += 1
        if count != nnz:
            raise MatrixMarketError(
                f"declared {nnz} entries but found {count}", line=lineno)

    if symmetry == "symmetric":
        off = rows != cols
        rows = np.concatenate([rows, cols[off]])
        cols = np.concatenate([cols, rows[:nnz][off]])
        vals = np.concatenate([vals, vals[off]])
    return SparseMatrix.from_coo(nrows, ncols, rows, cols, vals,
                                 sum_duplicates=True)


def write_matrix_market(M: SparseMatrix, path, comment: str | None = None):
    """Write coordinate-real-general with deterministic row-major ordering."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{_HEADER} matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{M.nrows} {M.ncols} {M.nnz}\n")
        rows = np.repeat(np.arange(M.nrows), np.diff(M.indptr))
        for r, c, v in zip(rows, M.indices, M.data):
            fh.write(f"{int(r) + 1} {int(c) + 1} {float(v)!r}\n")


SCHEMA_VERSION = 1


def save_system(sys, outdir, name="system"):
    """Serialize a system as A/B/C/D .mtx files plus a JSON sidecar."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}
    for tag, mat in (("A", sys.A), ("B", sys.B), ("C", sys.C), ("D", sys.D)):
        p = os.path.join(outdir, f"{name}_{tag}.mtx")
        write_matrix_market(mat, p)
        paths[tag] = os.path.basename(p)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "arrangement": "hat" if isinstance(sys, HatBlockSystem) else "standard",
        "dims": {"n": sys.n, "m": sys.m, "l": sys.l},
        "matrices": paths,
        "rhs": {"f": sys.f.tolist(), "g": sys.g.tolist(), "h": sys.h.tolist()},
        "note": sys.note,
    }
    meta_path = os.path.join(outdir, f"{name}.json")
    with open(meta_path, "w", encoding="ascii") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return meta_path


def load_system(meta_path):
    with open(meta_path, "r", encoding="ascii") as fh:
        meta = json.load(fh)
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise MatrixMarketError(
            f"unsupported sidecar schema {meta.get('schema_version')!r}")
    base = os.path.dirname(meta_path)
    mats = {tag: read_matrix_market(os.path.join(base, rel))
            for tag, rel in meta["matrices"].items()}
    rhs = meta["rhs"]
    cls = HatBlockSystem if meta.get("arrangement") == "hat" else BlockSystem
    return cls(mats["A"], mats["B"], mats["C"], mats["D"],
               np.asarray(rhs["f"], dtype=np.float64),
               np.asarray(rhs["g"], dtype=np.float64),
               np.asarray(rhs["h"], dtype=np.float64),
               note=meta.get("note", ""))


def load_system_from_blocks(path_a, path_b, path_c, path_d, rhs=None,
                            arrangement="standard", note=""):
    """Assemble a system from four standalone .mtx files (ingestion path)."""
    A = read_matrix_market(path_a)
    B = read_matrix_market(path_b)
    C = read_matrix_market(path_c)
    D = read_matrix_market(path_d)
    cls = HatBlockSystem if arrangement == "hat" else BlockSystem
    if rhs is None:
        from .system import with_ones_rhs
        sys = cls(A, B, C, D, np.zeros(A.nrows), np.zeros(B.nrows),
                  np.zeros(C.nrows), note=note)
        return with_ones_rhs(sys)
    f, g, h = rhs
    return cls(A, B, C, D, f, g, h, note=note)
