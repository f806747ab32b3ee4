"""Shared fixtures for the equilib test suite."""

from pathlib import Path

import pytest

from equilib.engine.charges import ChargeSet, PairConfig

FOUR_CHARGES = [(-2.0, 1.0, 1.0), (0.0, 3.0, -1.0), (1.0, 1.0, 2.0), (4.0, 0.5, -1.5)]


@pytest.fixture(autouse=True)
def isolated_home(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Keep user and project config files out of every test."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("HOME", str(home))
    monkeypatch.delenv("EQUILIB_JOBS", raising=False)
    monkeypatch.chdir(tmp_path)
    return home


@pytest.fixture
def four_charges() -> ChargeSet:
    return ChargeSet.from_triples(FOUR_CHARGES)


@pytest.fixture
def four_charges_file(tmp_path: Path) -> Path:
    path = tmp_path / "four.txt"
    lines = ["# four charges, total mass 1/2", ""]
    lines += [f"{re} {im} {s}" for re, im, s in FOUR_CHARGES]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def pair34() -> PairConfig:
    return PairConfig(beta1=3.0, beta2=4.0, gamma=0.6)
