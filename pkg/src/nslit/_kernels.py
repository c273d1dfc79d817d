"""Low-level evaluation kernels for the closed-form wave fields.

The square-window field behind the grating reduces to sums of Fresnel
integrals, one pair per slit edge; the Gaussian window reduces to sums of
complex-width Gaussians.  Both are evaluated here for batches of positions,
once with scipy special functions (reference path) and once as numba-compiled
kernels used by the trajectory integrator, where the same sums are needed
tens of millions of times.

The compiled Fresnel evaluation uses a cubic-Hermite table on [0, 10] (the
derivative of C + iS is exp(i*pi*u^2/2), known exactly) and a six-term
asymptotic expansion beyond; both branches agree with scipy to better than
2e-9 absolute.
"""

from __future__ import annotations

import numpy as np
from scipy.special import fresnel as _scipy_fresnel

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only on minimal installs
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range

# Fresnel table: F(u) = C(u) + i S(u) sampled on [0, UMAX] with step 1/INVDU.
_UMAX = 10.0
_INVDU = 1024.0
_NTAB = int(_UMAX * _INVDU) + 1
_u_tab = np.arange(_NTAB) / _INVDU
_S_TAB, _C_TAB = _scipy_fresnel(_u_tab)


def fresnel_cs(u):
    """Fresnel integrals as (C, S); thin wrapper fixing scipy's (S, C) order."""
    s, c = _scipy_fresnel(u)
    return c, s


@njit(cache=True, fastmath=False)
def _fres_one(u, ctab, stab):
    au = abs(u)
    if au <= _UMAX:
        p = au * _INVDU
        i = int(p)
        if i >= _NTAB - 1:
            i = _NTAB - 2
        w = p - i
        h = 1.0 / _INVDU
        u0 = i * h
        u1 = u0 + h
        a0 = 0.5 * np.pi * u0 * u0
        a1 = 0.5 * np.pi * u1 * u1
        omw = 1.0 - w
        w2 = w * w
        h00 = (1.0 + 2.0 * w) * omw * omw
        h10 = w * omw * omw
        h01 = w2 * (3.0 - 2.0 * w)
        h11 = w2 * (w - 1.0)
        c = h00 * ctab[i] + h10 * h * np.cos(a0) + h01 * ctab[i + 1] + h11 * h * np.cos(a1)
        s = h00 * stab[i] + h10 * h * np.sin(a0) + h01 * stab[i + 1] + h11 * h * np.sin(a1)
    else:
        # Auxiliary-function asymptotics; series in 1/(pi*u^2)^2.
        x = np.pi * au * au
        ix2 = 1.0 / (x * x)
        f = (1.0 - ix2 * (3.0 - ix2 * (105.0 - ix2 * 10395.0))) / (np.pi * au)
        g = (1.0 - ix2 * (15.0 - ix2 * (945.0 - ix2 * 135135.0))) / (np.pi * au * x)
        arg = 0.5 * x
        si = np.sin(arg)
        co = np.cos(arg)
        c = 0.5 + f * si - g * co
        s = 0.5 - f * co - g * si
    if u < 0.0:
        return -c, -s
    return c, s


@njit(cache=True, parallel=True, fastmath=False)
def _square_v_dens(x, t, edges, hbar, mass, ctab, stab):
    nb = x.shape[0]
    ne = edges.shape[0]
    gamma = np.sqrt(mass / (np.pi * hbar * t))
    v = np.empty(nb)
    dens = np.empty(nb)
    for i in prange(nb):
        pr = 0.0
        pi_ = 0.0
        dr = 0.0
        di = 0.0
        for e in range(ne):
            u = (edges[e] - x[i]) * gamma
            c, s = _fres_one(u, ctab, stab)
            if e % 2 == 1:  # right edge enters with +, left with -
                pr += c
                pi_ += s
                a = 0.5 * np.pi * u * u
                dr -= np.cos(a)
                di -= np.sin(a)
            else:
                pr -= c
                pi_ -= s
                a = 0.5 * np.pi * u * u
                dr += np.cos(a)
                di += np.sin(a)
        d = pr * pr + pi_ * pi_
        dens[i] = d
        # Im[dpsi * conj(psi)] / |psi|^2; the common prefactor cancels.
        v[i] = (hbar / mass) * gamma * (di * pr - dr * pi_) / d
    return v, dens


@njit(cache=True, parallel=True, fastmath=False)
def _gaussian_v_dens(x, t, centers, a, hbar, mass):
    nb = x.shape[0]
    nc = centers.shape[0]
    tau = 2.0 * hbar * t / (mass * a * a)
    denom = a * a * (1.0 + tau * tau)
    beta = 1.0 / denom
    v = np.empty(nb)
    dens = np.empty(nb)
    for i in prange(nb):
        pr = 0.0
        pi_ = 0.0
        dr = 0.0
        di = 0.0
        for j in range(nc):
            s = x[i] - centers[j]
            e = np.exp(-beta * s * s)
            ph = beta * tau * s * s
            c = np.cos(ph)
            sn = np.sin(ph)
            gr = e * c
            gi = e * sn
            pr += gr
            pi_ += gi
            # d/dx of exp(-(1 - i tau) beta s^2) = -2 beta (1 - i tau) s * (...)
            fr = -2.0 * beta * s
            fi = 2.0 * beta * tau * s
            dr += fr * gr - fi * gi
            di += fr * gi + fi * gr
        d = pr * pr + pi_ * pi_
        dens[i] = d
        v[i] = (hbar / mass) * (di * pr - dr * pi_) / d
    return v, dens


def square_psi_dpsi_ref(x, t, edges, hbar, mass, want_dpsi=True):
    """Raw edge sums for the square window via scipy Fresnel integrals.

    Returns (psi_raw, dpsi_raw) with the slit-sum convention
    psi_raw = sum_i F(u_r) - F(u_l); the caller applies the common
    amplitude exp(-i pi/4)/sqrt(2 n delta).  Work is chunked so large
    position batches do not allocate huge intermediates.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    gamma = np.sqrt(mass / (np.pi * hbar * t))
    psi = np.empty(len(x), dtype=complex)
    dpsi = np.empty(len(x), dtype=complex) if want_dpsi else None
    chunk = max(1, int(2e6 / max(len(edges), 1)))
    for i in range(0, len(x), chunk):
        u = (edges[None, :] - x[i : i + chunk, None]) * gamma
        s, c = _scipy_fresnel(u)
        f = c + 1j * s
        psi[i : i + chunk] = (f[:, 1::2] - f[:, 0::2]).sum(axis=1)
        if want_dpsi:
            ph = np.exp(1j * (0.5 * np.pi) * u * u)
            dpsi[i : i + chunk] = gamma * (ph[:, 0::2] - ph[:, 1::2]).sum(axis=1)
    return psi, dpsi


def gaussian_psi_dpsi_ref(x, t, centers, a, hbar, mass):
    """Raw center sums for the Gaussian window (complex spreading width).

    Each slit contributes exp(-(x-c)^2/(a^2 sigma)) with sigma = 1 + i tau,
    tau = 2 hbar t / (m a^2); the common sigma^(-1/2) and the overall
    normalization are applied by the caller.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tau = 2.0 * hbar * t / (mass * a * a)
    sigma = 1.0 + 1j * tau
    inv = 1.0 / (a * a * sigma)
    s = x[:, None] - centers[None, :]
    g = np.exp(-s * s * inv)
    psi = g.sum(axis=1)
    dpsi = (-2.0 * inv * s * g).sum(axis=1)
    return psi, dpsi


def square_velocity(x, t, edges, hbar, mass):
    """Guidance velocity and relative density |sum F|^2 for a square window."""
    x = np.ascontiguousarray(x, dtype=float)
    if HAVE_NUMBA:
        return _square_v_dens(x, t, edges, hbar, mass, _C_TAB, _S_TAB)
    psi, dpsi = square_psi_dpsi_ref(x, t, edges, hbar, mass)
    dens = psi.real**2 + psi.imag**2
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (hbar / mass) * (dpsi * psi.conj()).imag / dens
    return v, dens


def gaussian_velocity(x, t, centers, a, hbar, mass):
    """Guidance velocity and relative density for a Gaussian window."""
    x = np.ascontiguousarray(x, dtype=float)
    if HAVE_NUMBA:
        return _gaussian_v_dens(x, t, centers, a, hbar, mass)
    psi, dpsi = gaussian_psi_dpsi_ref(x, t, centers, a, hbar, mass)
    dens = psi.real**2 + psi.imag**2
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (hbar / mass) * (dpsi * psi.conj()).imag / dens
    return v, dens


def warm_up():
    """Trigger JIT compilation of the hot kernels outside timed sections."""
    if not HAVE_NUMBA:
        return
    xs = np.linspace(-1e-7, 1e-7, 8)
    edges = np.array([-5e-8, 5e-8])
    _square_v_dens(xs, 1e-6, edges, 1e-34, 1e-24, _C_TAB, _S_TAB)
    _gaussian_v_dens(xs, 1e-6, np.array([0.0]), 5e-8, 1e-34, 1e-24)
