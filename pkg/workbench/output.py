"""Functions writing the outputs of the workbench commands."""

import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from workbench.utils import code_version, get_git_commit_info, to_jsonable


@dataclass
class RunManifest:
    command: str
    data_source: str
    config_hash: str
    seed: int
    started_at: str
    code_version: str = field(default_factory=code_version)
    commit_date: str | None = field(default_factory=lambda: get_git_commit_info()[1])
    finished_at: str | None = None
    converged: bool | None = None
    outputs: list[str] = field(default_factory=list)


def utc_now() -> str:
    return datetime.now(tz=timezone.utc).isoformat(timespec="seconds")


def write_csv(df: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def write_json(content: object, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(content), indent=2, sort_keys=True) + "\n")
    return path


def write_manifest(manifest: RunManifest, out_dir: Path) -> Path:
    """manifest.json listing the outputs relative to out_dir."""
    return write_json(asdict(manifest), out_dir / "manifest.json")
