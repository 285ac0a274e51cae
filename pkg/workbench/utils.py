"""Utility functions."""

import hashlib
import json
import subprocess
from importlib import metadata

import numpy as np

PACKAGE_NAME = "repumper-lattice-workbench"


def get_git_commit_info() -> tuple[str, str] | tuple[None, None]:
    """Return current git commit hash and timestamp."""
    try:
        commit_info = (
            subprocess.check_output(
                ["git", "show", "-s", "--format=%H %cI"],
                stderr=subprocess.DEVNULL,
            )
            .strip()
            .decode("utf-8")
        )
        commit_hash, commit_date = commit_info.split(" ")
        return commit_hash, commit_date
    except (subprocess.CalledProcessError, FileNotFoundError, ValueError):
        return None, None


def code_version() -> str:
    """Git commit hash, else the installed package version, else 'unknown'."""
    commit_hash, _ = get_git_commit_info()
    if commit_hash is not None:
        return commit_hash
    try:
        return metadata.version(PACKAGE_NAME)
    except metadata.PackageNotFoundError:
        return "unknown"


def to_jsonable(value: object) -> object:
    """Convert numpy scalars/arrays and tuples to plain JSON types.

    Examples:
    ========
        >>> to_jsonable({"a": np.float64(1.5), "b": (1, np.int64(2)), "c": np.arange(2)})
        {'a': 1.5, 'b': [1, 2], 'c': [0, 1]}

    """
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def config_hash(settings: dict) -> str:
    """SHA-256 of the canonical JSON of a settings dict.

    Examples:
    ========
        >>> config_hash({"b": 1, "a": 2}) == config_hash({"a": 2, "b": 1})
        True

    """
    canonical = json.dumps(to_jsonable(settings), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def cell_seed(seed: int, i: int, j: int) -> int:
    """64-bit seed of map cell (i, j), a pure function of the master seed and indices."""
    state = np.random.SeedSequence(seed, spawn_key=(i, j)).generate_state(1, dtype=np.uint64)
    return int(state[0])


def kernel_seed(rng: np.random.Generator) -> int:
    """Seed for the compiled kernel's generator, drawn from a numpy stream."""
    return int(rng.integers(0, 2**32 - 1, dtype=np.uint64))
