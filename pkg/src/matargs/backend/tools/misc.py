import os
import traceback
from pathlib import Path

import tomllib

THREADS_ENV = "MATARGS_THREADS"


class MatargsError(Exception):
    """Root of every error raised on purpose by matargs."""


class DomainError(MatargsError, ValueError):
    """An operation was called outside its mathematical domain."""


class NotSymmetricError(DomainError):
    pass


class NotPositiveDefiniteError(DomainError):
    pass


class ParseError(MatargsError, ValueError):
    """Malformed partition, matrix specifier or command-line value."""


def exception_logger(exc: Exception, log_path: Path = Path("error.log")) -> None:
    """
    Logs an exception, with its traceback, to error.log.

    :param exc: The exception to log.
    :type exc: Exception
    :param log_path: The file the traceback is appended to.
    :type log_path: Path
    """

    error = "".join(traceback.format_exception(None, exc, exc.__traceback__))
    with open(log_path, "a") as log:
        log.write(error)


def get_project_version() -> str:
    try:
        path = Path(__file__).parent.parent.parent.parent.parent / "pyproject.toml"
        with open(path, "rb") as f:
            data = tomllib.load(f)
            return data["project"]["version"]
    except Exception:
        return "0.0.0 (unknown)"


def worker_count() -> int:
    """
    Number of worker processes for chunked Monte Carlo, capped by MATARGS_THREADS.

    :return: A positive worker count.
    :rtype: int
    """

    cores = os.cpu_count() or 1
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return cores
    try:
        cap = int(raw)
    except ValueError:
        raise ParseError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    if cap < 1:
        raise ParseError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return min(cap, cores)
