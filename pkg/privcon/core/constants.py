"""Defaults read from the environment (``.env`` is honoured)."""
import os

from dotenv import load_dotenv

load_dotenv()


def _env_seed() -> int | None:
    raw = os.getenv("PRIVCON_SEED")
    if raw is None or raw.strip() == "":
        return None
    return int(raw)


DEFAULT_SEED = _env_seed()
DEFAULT_TOL = float(os.getenv("PRIVCON_TOL", "1e-9"))
DEFAULT_MAX_ROUNDS = int(os.getenv("PRIVCON_MAX_ROUNDS", "10000"))
DEFAULT_TRIALS = int(os.getenv("PRIVCON_TRIALS", "20"))
LEDGER_ENABLED = os.getenv("PRIVCON_LEDGER", "false").lower() == "true"
LOG_FILE = os.getenv("LOG_FILE")
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# rationalization limits
CLI_MAX_DENOMINATOR = 10**6
SPLIT_MAX_DENOMINATOR = 10**7

# Alg1 weight sampler: numerators in 1..97 over 101
ALG1_NUMERATOR_MAX = 97
ALG1_DENOMINATOR = 101
ALG1_MAX_RETRIES = 16

# trace export
TRACE_MAX_ROWS = 10_000
