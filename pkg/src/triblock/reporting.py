"""Benchmark reports and plot-data writers (JSON + CSV)."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field

from . import __version__
from .backend import backend_name

REPORT_SCHEMA_VERSION = 1


def config_hash(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def environment_stamp() -> dict:
    return {
        "package_version": __version__,
        "kernel_backend": backend_name(),
        "python": platform.python_version(),
        "platform": platform.platform(),
    }


@dataclass
class BenchRow:
    problem: str
    kind: str
    iterations: int
    converged: bool
    final_residual: float
    true_residual: float
    wall_time: float


@dataclass
class BenchReport:
    config: dict
    rows: list = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION

    def add(self, **kwargs):
        self.rows.append(BenchRow(**kwargs))

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config,
            "config_hash": config_hash(self.config),
            "environment": environment_stamp(),
            "rows": [asdict(r) for r in self.rows],
        }

    def write_json(self, path):
        with open(path, "w", encoding="ascii") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="ascii") as fh:
            writer = csv.writer(fh)
            writer.writerow(["problem", "kind", "iterations", "converged",
                             "final_residual", "true_residual", "wall_time"])
            for r in self.rows:
                writer.writerow([r.problem, r.kind, r.iterations,
                                 int(r.converged), repr(r.final_residual),
                                 repr(r.true_residual), repr(r.wall_time)])


def write_plotdata(check, path):
    """Spectrum scatter as CSV (re, im, in_box) with the box corners in a
    leading comment."""
    box = check.box
    with open(path, "w", newline="", encoding="ascii") as fh:
        fh.write(f"# kind={check.kind} re_lo={box.re_lo!r} re_hi={box.re_hi!r} "
                 f"im_abs={box.im_abs!r} slack={check.slack!r}\n")
        writer = csv.writer(fh)
        writer.writerow(["re", "im", "in_box"])
        for re, im, ok in check.records():
            writer.writerow([repr(re), repr(im), int(ok)])


def write_box_json(boxes: dict, path, config: dict):
    payload = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config,
        "config_hash": config_hash(config),
        "environment": environment_stamp(),
        "boxes": {tag: {"re_lo": b.re_lo, "re_hi": b.re_hi, "im_abs": b.im_abs}
                  for tag, b in boxes.items()},
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
