from __future__ import annotations
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from app.runtime import RunEnv, get_log_level, get_run_env


'''Logging'''
_LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once; later calls only adjust the level."""
    lvl = (level or get_log_level()).upper()
    root = logging.getLogger()
    if not root.handlers:
        logging.basicConfig(level=lvl, format=_LOG_FORMAT)
    root.setLevel(lvl)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


'''Root Path Determination'''
def pick_workspace_root() -> Path:
    """
    Return a safe root for writing traces, snapshots and report summaries.
    Priority:
    1) WORKSPACE_ROOT env (if exists)
    2) /workspace (if exists)  # docker mount convention
    3) repo root inferred from this file location
    """
    ws = os.getenv("WORKSPACE_ROOT")
    if ws:
        p = Path(ws).expanduser().resolve()
        if p.exists():
            return p

    if Path("/workspace").exists():
        return Path("/workspace").resolve()

    # app/utils.py -> parents[1] => repo root
    return Path(__file__).resolve().parents[1]


'''Capabilities Gate'''
@dataclass(frozen=True)
class Capabilities:
    can_write_files: bool
    output_root: Path


def get_capabilities() -> Capabilities:
    env = get_run_env()

    if env == RunEnv.CLOUDRUN:
        # read-only image; only /tmp is writable
        return Capabilities(can_write_files=False, output_root=Path("/tmp"))

    return Capabilities(can_write_files=True, output_root=pick_workspace_root())


def resolve_output_path(path: str) -> Path:
    """
    Resolve where an artifact (trace, snapshot, summary) may be written.
    Relative paths resolve against the current directory; on Cloud Run everything
    is redirected under /tmp.
    """
    caps = get_capabilities()
    p = Path(path).expanduser()
    if not caps.can_write_files:
        return (caps.output_root / p.name).resolve()
    if not p.is_absolute():
        p = Path.cwd() / p
    return p.resolve()


def write_text_artifact(path: str, text: str) -> str:
    p = resolve_output_path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8")
    return str(p)
