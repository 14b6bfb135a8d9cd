"""Amplitude-noise filter functions and purity-loss estimators.

Spectral densities are two-sided, ``E[x(t1) x(t2)] = (1/2pi) int S(w)
exp(iw(t1 - t2)) dw``. The weak-noise purity loss is

    E[P] ~= (1/8pi) int S(w) sum_k D_k F_k(w) dw,
    F_k(w) = |alpha_k(T) evaluated at detuning delta_k + w|**2.

The Monte-Carlo estimator evaluates the exact per-realization purity loss
``1 - sum p_s p_s' exp(-2 chi_ss')`` on synthesized noise traces and is the
independent check of that formula.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .model import (SPIN_SIGNS, DriveSpec, ModeSpec, PhaseSequence, QubitPairState,
                    SpectrumNoise)
from .phasespace import closure_residual

__all__ = [
    "PreconditionError",
    "FilterFunctionCurve",
    "NoiseRealization",
    "SpectralPurity",
    "MonteCarloPurity",
    "filter_function",
    "filter_curves",
    "low_frequency_slope",
    "dk_weights",
    "check_decoupled",
    "purity_loss_spectral",
    "generate_noise",
    "realization_alphas",
    "purity_loss_from_alphas",
    "realization_purity_loss",
    "purity_loss_mc",
]

CLOSURE_TOL = 1e-8


class PreconditionError(ValueError):
    """Analysis refused because an assumption of the formula does not hold."""

    def __init__(self, message: str, residuals: dict | None = None):
        self.residuals = residuals or {}
        super().__init__(message)


@dataclass(frozen=True)
class FilterFunctionCurve:
    mode_indices: tuple[int, ...]
    omega: np.ndarray
    values: np.ndarray  # shape (n_modes, n_omega), units s^2
    weights: np.ndarray  # D_k

    @property
    def combined(self) -> np.ndarray:
        return self.weights @ self.values


@dataclass(frozen=True)
class NoiseRealization:
    times: np.ndarray
    samples: np.ndarray
    seed: object

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class SpectralPurity:
    value: float
    error: float


@dataclass(frozen=True)
class MonteCarloPurity:
    mean: float
    stderr: float
    values: np.ndarray
    seed: int


def filter_function(seq: PhaseSequence, delta: float, omega) -> np.ndarray:
    """Modal filter function ``F_k(w)`` in s^2."""
    return np.abs(closure_residual(seq, delta + np.asarray(omega, dtype=float))) ** 2


def dk_weights(modes: Sequence[ModeSpec], state: QubitPairState,
               pair: tuple[int, int] = (1, 2)) -> np.ndarray:
    """Mode weights ``D_k`` for a two-qubit state.

    Averaging ``|(s_i - s_l) eta1 + (s_j - s_m) eta2|**2`` over two
    independent draws from ``p = |c|**2`` gives twice the variance of
    ``eta1 s_1 + eta2 s_2``, so ``D_k = 2 (2 nbar + 1) Var_p(...)``.
    """
    p = state.probabilities
    out = []
    for m in modes:
        x = SPIN_SIGNS @ np.array([m.coupling(pair[0]), m.coupling(pair[1])])
        mean = p @ x
        var = p @ (x - mean) ** 2
        out.append(2 * m.thermal_factor * var)
    return np.asarray(out)


def filter_curves(seq: PhaseSequence, modes: Sequence[ModeSpec], omega,
                  state: QubitPairState | None = None, pair=(1, 2)) -> FilterFunctionCurve:
    omega = np.asarray(omega, dtype=float)
    values = np.array([filter_function(seq, m.detuning, omega) for m in modes])
    weights = (dk_weights(modes, state, pair) if state is not None
               else np.ones(len(modes)))
    return FilterFunctionCurve(tuple(m.index for m in modes), omega, values, weights)


def low_frequency_slope(seq: PhaseSequence, delta: float, lo: float = 1e-4,
                        hi: float = 1e-2, points: int = 41) -> float:
    """Log-log slope of ``F_k`` for ``w`` in ``[lo, hi] / step``."""
    w = np.geomspace(lo, hi, points) / seq.step
    f = filter_function(seq, delta, w)
    return float(np.polyfit(np.log(w), np.log(f), 1)[0])


def check_decoupled(seq: PhaseSequence, modes: Sequence[ModeSpec],
                    tol: float = CLOSURE_TOL) -> dict[int, float]:
    """Raise ``PreconditionError`` unless every ``|alpha_k(T)| <= tol*T``."""
    res = {m.index: abs(closure_residual(seq, m.detuning)) for m in modes}
    bad = {k: r for k, r in res.items() if r > tol * seq.duration}
    if bad:
        listing = ", ".join(f"mode {k}: |alpha|/T = {r / seq.duration:.3e}" for k, r in bad.items())
        raise PreconditionError(f"sequence leaves trajectories open ({listing})", res)
    return res


def purity_loss_spectral(seq: PhaseSequence, modes: Sequence[ModeSpec], state: QubitPairState,
                         noise: SpectrumNoise, pair=(1, 2), rtol: float = 1e-8,
                         resolution: float = 1.0) -> SpectralPurity:
    """Weak-noise ensemble-average purity loss by adaptive quadrature.

    The PSD support is cut into panels no wider than ``2pi / (T *
    resolution)`` with extra breakpoints at the filter peaks ``w = -delta_k``;
    each panel is integrated with ``scipy.integrate.quad``.
    """
    check_decoupled(seq, modes)
    lo, hi = noise.band
    if not math.isfinite(hi):
        raise ValueError("spectral purity loss needs a finite PSD high cutoff")
    weights = dk_weights(modes, state, pair)
    if noise.amplitude == 0 or not np.any(weights):
        return SpectralPurity(0.0, 0.0)

    def integrand(w):
        s = noise.psd(w)
        if s == 0:
            return 0.0
        f = sum(d * filter_function(seq, m.detuning, w) for d, m in zip(weights, modes) if d)
        return float(s * f)

    width = 2 * math.pi / (seq.duration * resolution)
    total, err = 0.0, 0.0
    for a, b in ((-hi, -lo), (lo, hi)):
        if b <= a:
            continue
        n_panels = min(int(math.ceil((b - a) / width)), 200_000)
        edges = np.linspace(a, b, n_panels + 1)
        peaks = [-m.detuning for m in modes if a < -m.detuning < b]
        edges = np.unique(np.concatenate([edges, peaks]))
        for x0, x1 in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(integrand, x0, x1, epsabs=0, epsrel=rtol, limit=100)
            total += val
            err += e
    return SpectralPurity(total / (8 * math.pi), err / (8 * math.pi))


def generate_noise(noise: SpectrumNoise, duration: float, dt: float, seed=None,
                   pad: int = 8) -> NoiseRealization:
    """Draw one stationary Gaussian trace with two-sided PSD ``noise``.

    Frequency-domain synthesis on a periodic grid ``pad`` times longer than
    the requested window: bin ``w_m = m dw`` gets independent cosine and
    sine amplitudes of variance ``S(w_m) dw / pi`` (half that for ``m = 0``,
    cosine only at ``m = 0`` and Nyquist). The returned trace samples
    ``t = 0, dt, ..., >= duration``.
    """
    lo, hi = noise.band
    if not dt > 0:
        raise ValueError("dt must be positive")
    if dt > math.pi / hi * (1 + 1e-12):
        raise ValueError(f"dt = {dt:g} s does not resolve the PSD cutoff (need dt <= pi/w_max)")
    n = int(math.ceil(duration / dt - 1e-9))
    times = dt * np.arange(n + 1)
    rng = np.random.default_rng(seed)
    length = pad * (n + 1)
    length += length % 2
    dw = 2 * math.pi / (length * dt)
    m = np.arange(length // 2 + 1)
    var = noise.psd(m * dw) * dw / math.pi
    var[0] *= 0.5
    a = rng.standard_normal(m.size) * np.sqrt(var)
    b = rng.standard_normal(m.size) * np.sqrt(var)
    b[0] = 0.0
    b[-1] = 0.0
    spec = 0.5 * length * (a - 1j * b)
    spec[0] = length * a[0]
    spec[-1] = length * a[-1]
    trace = np.fft.irfft(spec, n=length)[: n + 1]
    return NoiseRealization(times, trace, seed)


def _trapezoid_kernel(seq: PhaseSequence, times: np.ndarray, deltas) -> np.ndarray:
    """Weights ``K[k, j]`` with ``int x(t) e^{i d_k t} r(t) dt ~= K @ x``."""
    dt = times[1] - times[0]
    per = seq.step / dt
    k = int(round(per))
    if k < 1 or abs(per - k) > 1e-6:
        raise ValueError("noise grid must divide the sequence step evenly")
    n_pts = seq.n_segments * k + 1
    if times.size < n_pts:
        raise ValueError("noise trace shorter than the sequence")
    r = np.exp(-1j * seq.phase_array)
    rt = np.repeat(r, k)
    rt = np.append(rt, r[-1]) * 1.0
    # jumps at segment boundaries: average the two one-sided values
    bidx = k * np.arange(1, seq.n_segments)
    rt[bidx] = 0.5 * (r[:-1] + r[1:])
    rt[0] *= 0.5
    rt[-1] *= 0.5
    t = times[:n_pts]
    return dt * np.exp(1j * np.multiply.outer(np.asarray(deltas, dtype=float), t)) * rt


def realization_alphas(seq: PhaseSequence, modes: Sequence[ModeSpec],
                       realization: NoiseRealization, pair=(1, 2)) -> np.ndarray:
    """Noise-induced end-point displacements ``alpha_k^mu``, shape (M, 2)."""
    kern = _trapezoid_kernel(seq, realization.times, [m.detuning for m in modes])
    x = kern @ realization.samples[: kern.shape[1]]
    eta = np.array([[m.coupling(pair[0]), m.coupling(pair[1])] for m in modes])
    return -0.5j * eta * x[:, None]


def purity_loss_from_alphas(alphas: np.ndarray, modes: Sequence[ModeSpec],
                            state: QubitPairState) -> float:
    """Exact ``1 - sum p_s p_s' exp(-2 chi_ss')`` for Gaussian oscillator states."""
    p = state.probabilities
    # displacement of mode k in spin sector s: sum_mu s_mu alpha_k^mu
    disp = alphas @ SPIN_SIGNS.T  # (M, 4)
    diff = disp[:, :, None] - disp[:, None, :]
    thermal = np.array([m.thermal_factor for m in modes])
    two_chi = np.tensordot(thermal, np.abs(diff) ** 2, axes=1)
    return float(1 - p @ np.exp(-two_chi) @ p)


def realization_purity_loss(seq, modes, state, realization, pair=(1, 2)) -> float:
    return purity_loss_from_alphas(realization_alphas(seq, modes, realization, pair), modes, state)


def realization_seed(master: int, index: int) -> np.random.SeedSequence:
    """Child seed for realization ``index``; independent of execution order."""
    return np.random.SeedSequence(master, spawn_key=(index,))


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        threads = int(os.environ.get("PHASEGATE_THREADS", "1"))
    return max(1, int(threads))


def purity_loss_mc(seq: PhaseSequence, modes: Sequence[ModeSpec], drive: DriveSpec | None,
                   state: QubitPairState, noise: SpectrumNoise, n_realizations: int = 2000,
                   seed: int = 0, threads: int | None = None, samples_per_segment: int = 64,
                   pad: int = 8, pair=(1, 2)) -> MonteCarloPurity:
    """Monte-Carlo ensemble-average purity loss with its standard error.

    ``drive`` is accepted for interface symmetry; with a decoupling sequence
    the noiseless Rabi rate drops out of the end-point displacements.
    """
    check_decoupled(seq, modes)
    if n_realizations < 1:
        raise ValueError("need at least one realization")
    sps = max(samples_per_segment, int(math.ceil(seq.step * noise.band[1] / math.pi)))
    dt = seq.step / sps
    kern = _trapezoid_kernel(seq, dt * np.arange(seq.n_segments * sps + 1),
                             [m.detuning for m in modes])
    eta = np.array([[m.coupling(pair[0]), m.coupling(pair[1])] for m in modes])

    def one(i: int) -> float:
        real = generate_noise(noise, seq.duration, dt, realization_seed(seed, i), pad=pad)
        x = kern @ real.samples[: kern.shape[1]]
        return purity_loss_from_alphas(-0.5j * eta * x[:, None], modes, state)

    workers = _resolve_threads(threads)
    if workers == 1:
        values = np.array([one(i) for i in range(n_realizations)])
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            values = np.array(list(ex.map(one, range(n_realizations))))
    stderr = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    return MonteCarloPurity(float(values.mean()), stderr, values, seed)
