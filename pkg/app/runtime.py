import os
from enum import Enum

from dotenv import load_dotenv

load_dotenv()


class RunEnv(str, Enum):
    LOCAL = "local"
    CLOUDRUN = "cloudrun"


def get_run_env() -> RunEnv:
    if os.getenv("K_SERVICE"):
        return RunEnv.CLOUDRUN
    return RunEnv.LOCAL


def get_log_level(default: str = "WARNING") -> str:
    return (os.getenv("LOG_LEVEL") or default).upper()
