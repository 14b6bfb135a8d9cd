"""Pairwise entangling phases for piecewise-constant phase modulation.

The reported phase is

    phi_mu_nu = sum_k Im int_0^T dt1 int_0^t1 dt2 g_k^mu(t1) conj(g_k^nu(t2)),

with ``g_k^mu(t) = f_k^mu exp(i delta_k t) r(t)`` and the Molmer-Sorensen
coupling ``f_k^mu = -i Omega_mu eta_{mu,k} / 2``. For two qubits the gate
propagator contains ``exp(2i phi_12 sx sx)``, so a maximally entangling
gate needs ``phi_12 = pi/8`` (``2 phi_12 = pi/4``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import DriveSpec, ModeSpec, PhaseSequence
from .phasespace import expm1_over, trajectory

__all__ = [
    "DEFAULT_TARGET",
    "CalibrationError",
    "EntanglingPhaseReport",
    "coupling_strength",
    "entangling_phase",
    "entangling_phase_quadrature",
    "calibrate_rabi",
]

DEFAULT_TARGET = math.pi / 8


class CalibrationError(ValueError):
    """The sequence cannot be calibrated to the requested phase."""


@dataclass(frozen=True)
class EntanglingPhaseReport:
    pair: tuple[int, int]
    mode_indices: tuple[int, ...]
    a_terms: tuple[float, ...]
    b_terms: tuple[float, ...]
    contributions: tuple[float, ...]
    total: float

    @property
    def gate_phase(self) -> float:
        """``2*phi_12``, the coefficient of ``sx sx`` in the exponent."""
        return 2 * self.total


def coupling_strength(mode: ModeSpec, drive: DriveSpec, qubit: int) -> complex:
    """``f_k^mu = -i Omega_mu eta_{mu,k} / 2``."""
    return -0.5j * drive.rabi_for(qubit) * mode.coupling(qubit)


def _kernels(x: float) -> tuple[float, complex]:
    """Return ``2(1 - cos x)/x**2`` and ``(ix - e^{ix} + 1)/x**2``.

    Both are regular at ``x = 0`` (limits 1 and 1/2); multiplied by
    ``step**2`` they give the segment-pair and same-segment integrals.
    """
    if abs(x) < 1e-3:
        x2 = x * x
        cross = 1 - x2 / 12 + x2 * x2 / 360
        same = 0.5 + 1j * x / 6 - x2 / 24 - 1j * x * x2 / 120
        return cross, complex(same)
    return 2 * (1 - math.cos(x)) / (x * x), (1j * x - np.exp(1j * x) + 1) / (x * x)


def _a_sum(z: np.ndarray) -> complex:
    """``sum_{l > l'} z_l conj(z_l')`` in O(n)."""
    prefix = np.concatenate([[0.0], np.cumsum(np.conj(z))[:-1]])
    return complex(np.sum(z * prefix))


def _a_sine_sum(x: float, phases: np.ndarray) -> float:
    """Direct double sum of ``sin[(l - l') x - phi_l + phi_l']``."""
    n = phases.size
    ell = np.arange(n)
    arg = (ell[:, None] - ell[None, :]) * x - phases[:, None] + phases[None, :]
    return float(np.sum(np.tril(np.sin(arg), k=-1)))


def entangling_phase(seq: PhaseSequence, modes: Sequence[ModeSpec], drive: DriveSpec,
                     pair: tuple[int, int] = (1, 2)) -> EntanglingPhaseReport:
    """Closed-form entangling phase, mode by mode.

    Per mode, ``phi_k = step**2 * [K1(x) * A_k + Im(c * (n+1) * K2(x))]``
    with ``x = delta_k * step``, ``c = f^mu conj(f^nu)``,
    ``A_k = Im(c * sum_{l>l'} exp(i[(l-l')x - phi_l + phi_l']))`` and the
    kernels from ``_kernels``. This equals
    ``[2(1 - cos x) A_k + B_k] / delta_k**2`` but stays finite at
    ``delta_k = 0``. When ``c`` is real (the Molmer-Sorensen form) the
    result is cross-checked against the direct sine double sum.
    """
    mu, nu = pair
    if mu == nu:
        raise ValueError("entangling phase needs two distinct qubits")
    phases = seq.phase_array
    ell = np.arange(seq.n_segments)
    h = seq.step
    a_terms, b_terms, contrib = [], [], []
    for mode in modes:
        c = coupling_strength(mode, drive, mu) * np.conj(coupling_strength(mode, drive, nu))
        x = mode.detuning * h
        cross, same = _kernels(x)
        z = np.exp(1j * (ell * x - phases))
        a_k = float(np.imag(c * _a_sum(z)))
        b_scaled = float(np.imag(c * seq.n_segments * same))  # B_k / x**2
        if abs(c.imag) <= 1e-15 * abs(c) and c != 0:
            a_sine = c.real * _a_sine_sum(x, phases)
            tol = 1e-9 * max(1.0, abs(c.real) * seq.n_segments ** 2)
            assert abs(a_sine - a_k) <= tol, "sine-form reduction of A_k disagrees"
        a_terms.append(a_k)
        b_terms.append(b_scaled * x * x)
        contrib.append(h * h * (cross * a_k + b_scaled))
    return EntanglingPhaseReport(
        pair=(mu, nu),
        mode_indices=tuple(m.index for m in modes),
        a_terms=tuple(a_terms),
        b_terms=tuple(b_terms),
        contributions=tuple(contrib),
        total=float(sum(contrib)),
    )


# 24-point Gauss-Legendre rule on [0, 1]; the integrands are entire, so this
# is converged to machine precision for |delta*step| up to a few tens.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
_GL_X = 0.5 * (_GL_X + 1)
_GL_W = 0.5 * _GL_W


def entangling_phase_quadrature(seq: PhaseSequence, modes: Sequence[ModeSpec],
                                drive: DriveSpec, pair: tuple[int, int] = (1, 2),
                                nodes: int | None = None) -> float:
    """Numerical oracle for ``entangling_phase``.

    The inner integral is the exact displacement ``f^nu alpha_k(t1)``; the
    outer integral over ``t1`` is done by Gauss-Legendre quadrature on each
    segment.
    """
    if nodes is None:
        gx, gw = _GL_X, _GL_W
    else:
        gx, gw = np.polynomial.legendre.leggauss(nodes)
        gx, gw = 0.5 * (gx + 1), 0.5 * gw
    mu, nu = pair
    h = seq.step
    phases = seq.phase_array
    total = 0.0
    for mode in modes:
        f_mu = coupling_strength(mode, drive, mu)
        f_nu = coupling_strength(mode, drive, nu)
        d = mode.detuning
        seg = h * np.exp(1j * (d * np.arange(seq.n_segments) * h - phases)) * expm1_over(1j * d * h)
        starts = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
        acc = 0j
        for ell, phi in enumerate(phases):
            u = gx * h
            t1 = ell * h + u
            inner = starts[ell] + u * np.exp(1j * (d * ell * h - phi)) * expm1_over(1j * d * u)
            outer = np.exp(1j * (d * t1 - phi))
            acc += h * np.sum(gw * outer * np.conj(inner))
        total += float(np.imag(f_mu * np.conj(f_nu) * acc))
    return total


def calibrate_rabi(seq: PhaseSequence, modes: Sequence[ModeSpec], pair: tuple[int, int] = (1, 2),
                   target: float = DEFAULT_TARGET, drive: DriveSpec | None = None) -> float:
    """Rabi rate giving entangling phase ``target`` for ``pair``.

    Uses the exact quadratic scaling ``phi(c*Omega) = c**2 * phi(Omega)``.
    """
    base = drive.with_rabi(1.0) if drive is not None else DriveSpec(1.0, tuple(sorted(set(pair))))
    unit = entangling_phase(seq, modes, base, pair).total
    if unit == 0 or not math.isfinite(unit):
        raise CalibrationError(f"sequence generates no entangling phase for pair {pair}")
    ratio = target / unit
    if ratio <= 0:
        raise CalibrationError(
            f"target {target:g} rad has the opposite sign to the unit-drive phase {unit:g} rad")
    return math.sqrt(ratio)
