"""Log routing: stdout stays clean, debug only when asked for."""

import structlog

from equilib.engine.charges import PairConfig
from equilib.engine.pair_solver import equilibrium_density
from equilib.runtime.log import configure_logging


def test_importing_the_package_configures_logging():
    assert structlog.is_configured()


def test_default_level_keeps_debug_events_quiet(capsys):
    configure_logging()
    equilibrium_density(PairConfig(beta1=3.0, beta2=4.0, gamma=0.6))
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "pair.endpoints.solved" not in captured.err


def test_verbose_logs_go_to_stderr(capsys):
    configure_logging(verbose=True)
    try:
        equilibrium_density(PairConfig(beta1=3.0, beta2=4.0, gamma=0.6))
        captured = capsys.readouterr()
        assert captured.out == ""
        assert "pair.endpoints.solved" in captured.err
    finally:
        configure_logging()


def test_warnings_reach_stderr(capsys):
    configure_logging()
    structlog.get_logger("equilib.test").warning("oracle.minimize.not_converged", iterations=3)
    assert "not_converged" in capsys.readouterr().err
