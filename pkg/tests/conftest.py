"""
Shared fixtures for the AtomLens test suite
"""
import sys
from pathlib import Path

import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.models import FocusGeometry  # noqa: E402


@pytest.fixture
def table_geometry():
    """f = 4.5 mm, 780 nm, w_L = 1.1 mm"""
    return FocusGeometry(w_l=1.1e-3, f=4.5e-3, wavelength=780e-9)


@pytest.fixture
def short_geometry():
    """Strongly focused geometry at a short focal length, cheap to decompose"""
    return FocusGeometry.from_u(0.5, f=1e-3, wavelength=780e-9)


@pytest.fixture
def paraxial_geometry():
    return FocusGeometry.from_u(0.022, f=1e-3, wavelength=780e-9)
