"""Run configuration, manifests, and atomic file output.

Config values come from built-in defaults, then an optional ``key =
value`` config file, then command-line flags (highest precedence).
Every command writes a manifest before any data file and finalizes it
(atomically, like all writes here) when done; the manifest records the
config snapshot and master seed, which reproduce every output.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

__all__ = [
    "RunConfig",
    "RunManifest",
    "parse_config_file",
    "atomic_write_text",
    "write_json",
    "write_csv",
    "csv_cell",
]

ENGINE_CHOICES = ("reference", "bitparallel", "none")


@dataclass
class RunConfig:
    l: int = 10
    n: int = 4096
    seed: int = 0
    reps: int = 200
    epsilon: float = 0.1
    c2: float | None = None  # None resolves to 80 / epsilon^2
    c: float = 1.0
    engine: str = "bitparallel"
    out: str = "runs"
    cap: int = 10**5  # exact-drift enumeration cap
    cap_xi: int = 10**6  # conditional-set enumeration cap
    drift_k: int = 200  # draws per sampled drift estimate

    def __post_init__(self) -> None:
        if self.l < 2 or self.n < self.l + 1:
            raise ValueError("need l >= 2 and n >= l + 1")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.c <= 0 or (self.c2 is not None and self.c2 <= 0):
            raise ValueError("c and c2 must be positive")
        if self.reps < 0 or self.cap < 1 or self.cap_xi < 1 or self.drift_k < 2:
            raise ValueError("reps must be >= 0; caps >= 1; drift_k >= 2")
        if self.engine not in ENGINE_CHOICES:
            raise ValueError(f"engine must be one of {ENGINE_CHOICES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def resolved_c2(self) -> float:
        return self.c2 if self.c2 is not None else 80.0 / self.epsilon**2

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["resolved_c2"] = self.resolved_c2
        return d

    @classmethod
    def from_sources(cls, config_path: str | None, overrides: dict) -> "RunConfig":
        values: dict = {}
        if config_path:
            values.update(parse_config_file(config_path))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


_CONFIG_TYPES = {
    "l": int,
    "n": int,
    "seed": int,
    "reps": int,
    "epsilon": float,
    "c2": float,
    "c": float,
    "engine": str,
    "out": str,
    "cap": int,
    "cap_xi": int,
    "drift_k": int,
}


def parse_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_TYPES:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _CONFIG_TYPES[key](value.strip())
    return values


@dataclass
class RunManifest:
    command: str
    config: dict
    version: str = __version__
    started: str = ""
    finished: str | None = None
    seeds: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def path(self, out_dir: Path) -> Path:
        return out_dir / f"manifest_{self.command}.json"

    def write(self, out_dir: Path) -> Path:
        p = self.path(out_dir)
        write_json(p, dataclasses.asdict(self))
        return p


def start_manifest(command: str, config: RunConfig, seeds: dict, out_dir: Path) -> RunManifest:
    man = RunManifest(
        command=command,
        config=config.to_dict(),
        started=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        seeds=seeds,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    man.write(out_dir)
    return man


def finish_manifest(man: RunManifest, out_dir: Path, outputs: list[str]) -> None:
    man.finished = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    man.outputs = sorted(outputs)
    man.write(out_dir)


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: Path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def csv_cell(v) -> str:
    """Canonical CSV cell: shortest round-trip float repr, 'nan' for NaN."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(csv_cell(v) for v in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
