# File: logging.py

import logging
import time
from functools import wraps
from typing import Any, Callable, Optional

import colorlog

from utils.errors import HForgeError

CONSOLE_HANDLER = "hforge-console"
LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}


def setup_logging(level: int = logging.INFO, log_file: Optional[str] = None) -> None:
    """
    Colored stderr logging for the CLI, plus a plain log file if asked.

    Calling it again replaces the hforge console handler instead of
    stacking a second one.

    :param level: Root logger level
    :param log_file: Optional path that receives an uncolored copy
    """
    root = colorlog.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == CONSOLE_HANDLER:
            root.removeHandler(handler)

    # stderr, so JSON on stdout stays clean
    console = colorlog.StreamHandler()
    console.set_name(CONSOLE_HANDLER)
    console.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s%(levelname)-8s%(reset)s %(blue)s%(asctime)s%(reset)s %(name)s - %(message)s",
            datefmt="%H:%M:%S",
            log_colors=LOG_COLORS,
        )
    )
    root.setLevel(level)
    root.addHandler(console)

    if log_file:
        to_file = logging.FileHandler(log_file)
        to_file.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s - %(message)s"))
        root.addHandler(to_file)


def summarize(value: Any, limit: int = 120) -> str:
    """
    Render a value for a log line without dumping large collections.

    Graphs, instances and witnesses report their own summary; long
    sequences and sets are reported by type and size.
    """
    if hasattr(value, "summary") and callable(value.summary):
        return value.summary()
    if isinstance(value, (list, tuple, set, frozenset, dict)) and len(value) > 8:
        return f"{type(value).__name__}[{len(value)}]"
    text = repr(value)
    return text if len(text) <= limit else text[: limit - 3] + "..."


def _call_line(name: str, args: tuple, kwargs: dict) -> str:
    parts = [summarize(a) for a in args] + [f"{key}={summarize(v)}" for key, v in kwargs.items()]
    return f"{name}({', '.join(parts)})"


def log_function(logger: logging.Logger, level: int = logging.INFO) -> Callable[[Callable], Callable]:
    """
    Log start, finish and elapsed time of a construction, solver or experiment.

    Arguments are summarized at DEBUG. An HForgeError is logged as one
    warning line, since callers such as the CLI map it to an exit code;
    anything else is logged with its traceback.

    :param logger: Logger of the decorated function's module
    :param level: Level of the start/finish lines; inner solvers that run
        thousands of times per sweep use DEBUG
    """

    def decorator(func: Callable) -> Callable:
        name = func.__qualname__

        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            if logger.isEnabledFor(logging.DEBUG):
                logger.debug(f"Call {_call_line(name, args, kwargs)}")
            logger.log(level, f"Starting: {name}")
            started = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except HForgeError as exc:
                logger.warning(f"{name} stopped: {type(exc).__name__}: {exc}")
                raise
            except Exception:
                logger.exception(f"Unexpected failure in {name}")
                raise
            elapsed = time.perf_counter() - started
            logger.log(level, f"Completed: {name} in {elapsed:.3f}s")
            if result is not None:
                logger.debug(f"{name} -> {summarize(result)}")
            return result

        return wrapper

    return decorator
