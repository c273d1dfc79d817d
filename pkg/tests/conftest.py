import numpy as np
import pytest

from nslit import VelocityField, presets
from nslit import _kernels


@pytest.fixture(scope="session", autouse=True)
def _compile_kernels():
    _kernels.warm_up()


@pytest.fixture(scope="session")
def fig1():
    return presets()["fig1"]


@pytest.fixture(scope="session")
def fig1_field(fig1):
    return fig1.make_field()


@pytest.fixture(scope="session")
def fig1_vf(fig1_field):
    return VelocityField(fig1_field)


def bin_averaged_density(field, y, edges, pts_per_bin=64):
    """Exact-mass bin averages of |psi|^2 at distance y."""
    fine = np.linspace(edges[0], edges[-1], (len(edges) - 1) * pts_per_bin + 1)
    dens = field.density_closed(fine, field.y_to_t(y))
    cum = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2 * np.diff(fine))])
    return np.diff(np.interp(edges, fine, cum)) / np.diff(edges)


def histogram_l1(samples, field, y, bins=64, qrange=(0.005, 0.995)):
    """L1 distance between a sample histogram and bin-averaged |psi|^2."""
    lo, hi = np.quantile(samples, qrange)
    half = 1.02 * max(abs(lo), abs(hi))
    edges = np.linspace(-half, half, bins + 1)
    h, _ = np.histogram(samples, bins=edges, density=True)
    q = bin_averaged_density(field, y, edges)
    dx = edges[1] - edges[0]
    p = h / (h.sum() * dx)
    q = q / (q.sum() * dx)
    return float(np.abs(p - q).sum() * dx)
