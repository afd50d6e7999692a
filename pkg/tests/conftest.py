import numpy as np
import pytest
from scipy.optimize import brentq

from robin_spectra import geometry as geo


@pytest.fixture(scope="session")
def circle_geom():
    curve = geo.from_fourier(*geo.shape_fourier("circle:1"))
    return geo.arclength_resample(curve, 256)


@pytest.fixture(scope="session")
def circle_arc():
    return geo.RobinArc(ell=np.pi)


@pytest.fixture(scope="session")
def ellipse_geom():
    curve = geo.from_fourier(*geo.shape_fourier("ellipse:2,1"))
    return geo.arclength_resample(curve, 256)


@pytest.fixture(scope="session")
def ellipse_interior():
    """Arc centered on the high-curvature vertex: interior maximum, m = 2."""
    curve = geo.from_fourier(*geo.shape_fourier("ellipse:2,1"), phase_origin=-0.8)
    return geo.arclength_resample(curve, 512), geo.RobinArc(ell=2.0)


@pytest.fixture(scope="session")
def ellipse_endpoint():
    """Arc starting past the vertex: endpoint maximum with k'(0) < 0."""
    curve = geo.from_fourier(*geo.shape_fourier("ellipse:2,1"), phase_origin=0.4)
    return geo.arclength_resample(curve, 512), geo.RobinArc(ell=2.2)


def inflection_phase() -> float:
    """Parameter angle on the falling curvature branch where k''(s) = 0."""
    base = geo.arclength_resample(
        geo.from_fourier(*geo.shape_fourier("ellipse:2,1")), 512
    )

    def k2_at(theta):
        s = base._cumlen(np.array([theta]))[0]
        return float(base.curvature(s, 2))

    return brentq(k2_at, 0.1, 1.2, rtol=1e-13)


@pytest.fixture(scope="session")
def ellipse_inflection():
    """Endpoint maximum anchored at the curvature inflection (clean m = 1)."""
    curve = geo.from_fourier(
        *geo.shape_fourier("ellipse:2,1"), phase_origin=inflection_phase()
    )
    return geo.arclength_resample(curve, 512), geo.RobinArc(ell=2.2)
