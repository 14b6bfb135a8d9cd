"""Analytic phase-space trajectories under piecewise-constant phase modulation.

For a sequence ``r(t)`` with segment phases ``phi_l`` the unscaled
displacement of a mode with detuning ``delta`` is

    alpha(t) = int_0^t exp(i delta s) r(s) ds,

evaluated here segment by segment in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import comb

from .model import PhaseSequence, PolynomialNoise

__all__ = [
    "SMALL_ARG",
    "expm1_over",
    "segment_integral",
    "segment_integrals",
    "closure_residual",
    "normalized_residual",
    "Trajectory",
    "trajectory",
    "weighted_residual",
    "weighted_residual_quad",
    "monomial_scale",
    "closure_table",
]

# below this |delta*step| the direct (e^z - 1)/z loses too many digits
SMALL_ARG = 1e-6


def expm1_over(z):
    """``(exp(z) - 1)/z`` with the removable singularity at 0 filled in."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    small = np.abs(z) < SMALL_ARG
    zs = z[small]
    out[small] = 1 + zs / 2 + zs**2 / 6 + zs**3 / 24
    zl = z[~small]
    out[~small] = np.expm1(zl) / zl
    return out if out.ndim else out[()]


def segment_integral(delta: float, step: float, phase: float, ell: int) -> complex:
    """``int`` over segment ``ell`` of ``exp(i delta t) exp(-i phase)``."""
    return complex(step * np.exp(1j * (delta * ell * step - phase))
                   * expm1_over(1j * delta * step))


def segment_integrals(seq: PhaseSequence, delta: float) -> np.ndarray:
    """All per-segment contributions at once."""
    ell = np.arange(seq.n_segments)
    return (seq.step * np.exp(1j * (delta * ell * seq.step - seq.phase_array))
            * expm1_over(1j * delta * seq.step))


def closure_residual(seq: PhaseSequence, delta) -> complex | np.ndarray:
    """``alpha(T)`` at the end of the sequence; vectorized over ``delta``."""
    delta = np.asarray(delta, dtype=float)
    if delta.ndim == 0:
        return complex(np.sum(segment_integrals(seq, float(delta))))
    ell = np.arange(seq.n_segments)
    z = np.exp(1j * (np.multiply.outer(delta, ell * seq.step) - seq.phase_array))
    return seq.step * expm1_over(1j * delta * seq.step) * z.sum(axis=-1)


def normalized_residual(seq: PhaseSequence, delta: float) -> float:
    """``|delta| * |alpha(T)|``, the scale-free closure measure."""
    return abs(delta) * abs(closure_residual(seq, delta))


@dataclass(frozen=True)
class Trajectory:
    mode_index: int
    times: np.ndarray
    values: np.ndarray
    detuning: float

    @property
    def normalized(self) -> np.ndarray:
        return abs(self.detuning) * self.values

    @property
    def endpoint(self) -> complex:
        return complex(self.values[-1])

    def scaled(self, coupling: complex) -> np.ndarray:
        """Per-qubit trajectory ``f * alpha(t)``."""
        return coupling * self.values


def trajectory(seq: PhaseSequence, delta: float, samples_per_segment: int = 32,
               mode_index: int = 0) -> Trajectory:
    """Sample ``alpha(t)`` exactly on a uniform grid within each segment.

    The grid has ``samples_per_segment`` intervals per segment, so segment
    boundaries are always sample points and the last sample is ``alpha(T)``.
    """
    if samples_per_segment < 1:
        raise ValueError("samples_per_segment must be >= 1")
    n, h = seq.n_segments, seq.step
    seg = segment_integrals(seq, delta)
    starts = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    frac = np.arange(samples_per_segment) / samples_per_segment
    local = frac * h  # offsets within a segment
    ell = np.arange(n)[:, None]
    partial = (local * np.exp(1j * (delta * ell * h - seq.phase_array[:, None]))
               * expm1_over(1j * delta * local))
    values = (starts[:, None] + partial).ravel()
    times = (ell * h + local).ravel()
    total = np.sum(seg)
    return Trajectory(mode_index, np.append(times, seq.duration),
                      np.append(values, total), delta)


def _local_moments(delta: float, h: float, jmax: int) -> np.ndarray:
    """``m_i = int_0^h u**i exp(i delta u) du`` for ``i = 0..jmax``."""
    x = delta * h
    m = np.empty(jmax + 1, dtype=complex)
    if abs(x) <= max(jmax, 1) + 1:
        # power series in x; terms decay once n > |x|
        nterms = int(40 + 2 * abs(x))
        n = np.arange(nterms)
        coef = (1j * x) ** n / np.cumprod(np.concatenate([[1.0], np.arange(1, nterms)]))
        for i in range(jmax + 1):
            m[i] = h ** (i + 1) * np.sum(coef / (n + i + 1))
    else:
        # upward recurrence is stable while i < |x|
        e = np.exp(1j * x)
        m[0] = h * expm1_over(1j * x)
        for i in range(1, jmax + 1):
            m[i] = (h**i * e - i * m[i - 1]) / (1j * delta)
    return m


def _as_coefficients(beta) -> np.ndarray:
    if isinstance(beta, PolynomialNoise):
        return np.asarray(beta.coefficients)
    return np.atleast_1d(np.asarray(beta))


def weighted_residual(seq: PhaseSequence, delta: float, beta) -> complex:
    """``int exp(i delta t) r(t) beta(t) dt`` for a polynomial ``beta``.

    Each segment is shifted to local time ``u = t - a`` so that
    ``t**j = sum_i C(j, i) a**(j-i) u**i`` has only non-negative terms.
    """
    coeffs = _as_coefficients(beta)
    p = coeffs.size - 1
    h = seq.step
    m = _local_moments(delta, h, p)
    total = 0j
    for ell, phi in enumerate(seq.phases):
        a = ell * h
        acc = 0j
        for j, bj in enumerate(coeffs):
            if bj == 0:
                continue
            i = np.arange(j + 1)
            acc += bj * np.sum(comb(j, i) * a ** (j - i) * m[: j + 1])
        total += np.exp(1j * (delta * a - phi)) * acc
    return complex(total)


def weighted_residual_quad(seq: PhaseSequence, delta: float, beta,
                           rtol: float = 1e-12) -> complex:
    """Adaptive-quadrature evaluation of the same integral (validation path)."""
    coeffs = _as_coefficients(beta)
    total = 0j
    for ell, phi in enumerate(seq.phases):
        a, b = ell * seq.step, (ell + 1) * seq.step
        scale = (b - a) * np.sum(np.abs(coeffs) * b ** np.arange(coeffs.size))

        def f(t, phi=phi):
            return np.exp(1j * (delta * t - phi)) * np.polynomial.polynomial.polyval(t, coeffs)

        re = integrate.quad(lambda t: f(t).real, a, b, epsabs=rtol * scale, epsrel=rtol,
                            limit=200)[0]
        im = integrate.quad(lambda t: f(t).imag, a, b, epsabs=rtol * scale, epsrel=rtol,
                            limit=200)[0]
        total += re + 1j * im
    return complex(total)


def monomial_scale(duration: float, j: int) -> float:
    """``int_0^T t**j dt``; reference scale for relative weighted residuals."""
    return duration ** (j + 1) / (j + 1)


def closure_table(seq: PhaseSequence, detunings: Sequence[float]) -> np.ndarray:
    return np.array([closure_residual(seq, d) for d in detunings])
