"""Calculus on 2*pi-periodic functions of the fast variable tau.

Implements the averaging operator and the mean-zero antiderivatives used by
the initial-data construction, together with the closed-form oscillation
matrices A(tau), B(tau) = L^{-1}A and the constant C = A*B.

All operators act through the discrete Fourier transform on a tau grid; for
trigonometric-polynomial input resolved by the grid they are exact.  The
Nyquist mode k = -N/2 is divided by (i k) like any other nonzero mode; it is
identically zero for all band-limited data handled here.
"""

import numpy as np

__all__ = ["pi_avg", "linv", "linv2", "osc_matrices", "apply_A", "apply_B", "apply_C"]


def pi_avg(h, axis=-2):
    """Average over tau (the k=0 Fourier coefficient), with the axis kept
    as size 1 so results broadcast against the input."""
    return np.mean(h, axis=axis, keepdims=True)


def _mode_inverse(h, axis, power):
    h = np.asarray(h, dtype=complex)
    n = h.shape[axis]
    k = np.fft.fftfreq(n, 1.0 / n)
    shape = [1] * h.ndim
    shape[axis] = n
    k = k.reshape(shape)
    hhat = np.fft.fft(h, axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = hhat / (1j * k) ** power
    # zero the k=0 slot: (I - Pi) applied to the input, mean-zero output
    sl = [slice(None)] * h.ndim
    sl[axis] = slice(0, 1)
    out[tuple(sl)] = 0.0
    return np.fft.ifft(out, axis=axis)


def linv(h, axis=-2):
    """Mean-zero antiderivative: mode k != 0 divided by (i k), mode 0 dropped.

    Equals (I - Pi) applied to the tau-antiderivative of (I - Pi) h, so the
    operator is total (nonzero input mean is simply discarded).
    """
    return _mode_inverse(h, axis, 1)


def linv2(h, axis=-2):
    """Second mean-zero antiderivative: mode k != 0 divided by (i k)^2."""
    return _mode_inverse(h, axis, 2)


def osc_matrices(tau):
    """Closed-form (A(tau), B(tau), C) as 2x2 arrays (stacked for array tau).

    A(tau) = [[0, e^{2i tau}], [e^{-2i tau}, 0]]
    B(tau) = -(i/2) [[0, e^{2i tau}], [-e^{-2i tau}, 0]]
    C      = A(tau) B(tau) = (i/2) diag(1, -1), independent of tau.
    """
    tau = np.asarray(tau, dtype=float)
    z = np.exp(2j * tau)
    zero = np.zeros_like(z)
    a = np.stack(
        [np.stack([zero, z], axis=-1), np.stack([np.conj(z), zero], axis=-1)],
        axis=-2,
    )
    b = -0.5j * np.stack(
        [np.stack([zero, z], axis=-1), np.stack([-np.conj(z), zero], axis=-1)],
        axis=-2,
    )
    c = 0.5j * np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
    return a, b, c


def apply_A(tau, u):
    """A(tau) applied to a spinor-valued array with leading component axis.

    ``tau`` must broadcast against ``u[0]`` (scalar, or a (n_tau, 1) column
    for two-scale fields of shape (2, n_tau, n_x)).
    """
    z = np.exp(2j * np.asarray(tau))
    return np.stack([z * u[1], np.conj(z) * u[0]])


def apply_B(tau, u):
    """B(tau) = L^{-1}A applied to a spinor-valued array (see apply_A)."""
    z = np.exp(2j * np.asarray(tau))
    return np.stack([-0.5j * z * u[1], 0.5j * np.conj(z) * u[0]])


def apply_C(u):
    """C = (i/2) diag(1, -1) applied to a spinor-valued array."""
    return np.stack([0.5j * u[0], -0.5j * u[1]])
