"""Shared fixtures: small grids and reduced experiment files."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from gcss.physics.coherent import PulseParams
from gcss.physics.wigner import PhaseGrid


@pytest.fixture
def pulse():
    return PulseParams()


@pytest.fixture
def origin_grid():
    """Origin-centered grid with a node at (0, 0)."""
    return PhaseGrid.around(0.0, 4.0, 41)


@pytest.fixture
def write_config(tmp_path):
    """Write an INI experiment file from ``{section: {key: value}}``."""

    def write(sections, name="experiment.ini"):
        lines = []
        for section, values in sections.items():
            lines.append(f"[{section}]")
            lines.extend(f"{key} = {value}" for key, value in values.items())
            lines.append("")
        path = tmp_path / name
        path.write_text("\n".join(lines))
        return path

    return write


@pytest.fixture
def reduced_trace():
    """[trace] values valid for the 800 nm / 25 fs pulse on a coarse grid."""
    return {
        "tau_min": -40,
        "tau_max": 40,
        "tau_step": 0.2,
        "t_window": 100,
        "t_step": 0.1,
        "points_per_cycle": 13,
        "chunk_size": 64,
    }
