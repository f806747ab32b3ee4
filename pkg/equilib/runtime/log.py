"""structlog setup shared by the CLI and worker processes."""

import logging
import sys

import structlog


def configure_logging(verbose: bool = False) -> None:
    """Send structured logs to stderr so stdout carries only CSV."""
    level = logging.DEBUG if verbose else logging.WARNING
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        # resolved per logger, so a swapped sys.stderr is followed
        logger_factory=lambda *_: structlog.PrintLogger(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


# library use without the CLI still gets warnings only, on stderr
if not structlog.is_configured():
    configure_logging()
