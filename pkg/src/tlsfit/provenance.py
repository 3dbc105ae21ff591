"""Provenance headers stamped on every emitted file."""

from __future__ import annotations

import hashlib
import shlex
from pathlib import Path

from . import __version__

# header keys owned by the provenance block, skipped when re-reading files
KEYS = ("tool", "command", "seed", "input")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def header_lines(argv=None, seed=None, inputs=()) -> list[str]:
    """``key=value`` strings (without the leading ``#``)."""
    lines = [f"tool=tlsfit {__version__}"]
    if argv is not None:
        lines.append("command=" + shlex.join(["tlsfit", *argv]))
    if seed is not None:
        lines.append(f"seed={seed}")
    for path in inputs:
        lines.append(f"input={Path(path).name} sha256:{file_digest(path)}")
    return lines
