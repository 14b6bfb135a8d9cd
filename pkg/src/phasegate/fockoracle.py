"""Brute-force propagation of the qubit-oscillator Hamiltonian in Fock space.

The Hamiltonian commutes with every spin operator along the drive axis, so
for each of the four two-qubit spin sectors ``s = (s_1, s_2)`` the
oscillators see a classical force

    H_s(t) = i * sum_k (G_sk(t) a_k^dag - conj(G_sk(t)) a_k),
    G_sk(t) = sum_mu s_mu f_k^mu(t) exp(i delta_k t) r(t).

Modes are independent within a sector, so each mode is propagated on its
own truncated space and the reduced qubit state is assembled from the
per-mode overlaps. Each time step applies the exact exponential of the
generator frozen at the step midpoint.

This checks the linearized interaction-picture model itself, not the
underlying ion physics.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import SPIN_SIGNS, DriveSpec, ModeSpec, PhaseSequence, QubitPairState

__all__ = [
    "LEAKAGE_THRESHOLD",
    "FockConfig",
    "ReducedQubitState",
    "propagate",
    "purity_loss_oracle",
    "extract_entangling_phase",
]

LEAKAGE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class FockConfig:
    """Truncation and stepping settings.

    ``n_max`` is the highest Fock level kept. ``dt`` defaults to
    ``step/200`` and is rounded down so each segment holds a whole number
    of steps. ``modes`` selects mode indices (default: all). ``initial``
    is ``"thermal"`` (Boltzmann mixture at each mode's mean occupation,
    truncated at ``n_max``) or ``"vacuum"``.
    """

    n_max: int = 20
    dt: float | None = None
    modes: tuple[int, ...] | None = None
    initial: str = "thermal"

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.modes is not None and not self.modes:
            raise ValueError("at least one mode must be included")
        if self.initial not in ("thermal", "vacuum"):
            raise ValueError("initial must be 'thermal' or 'vacuum'")

    def steps_per_segment(self, step: float) -> int:
        if self.dt is None:
            return 200
        return max(1, int(math.ceil(step / self.dt - 1e-9)))


@dataclass(frozen=True)
class ReducedQubitState:
    rho: np.ndarray
    top_population: float
    norm_error: float
    sector_drift: float
    thermal_truncation: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @property
    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    @property
    def purity_loss(self) -> float:
        return 1.0 - self.purity

    @property
    def reliable(self) -> bool:
        return self.top_population <= LEAKAGE_THRESHOLD


def _quadrature_eig(dim: int):
    """Eigen-decomposition of the truncated ``i(a^dag - a)``."""
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    q = 1j * (a.T - a)
    lam, vec = np.linalg.eigh(q)
    return lam, vec


def _thermal_weights(nbar: float, dim: int) -> tuple[np.ndarray, float]:
    if nbar == 0:
        w = np.zeros(dim)
        w[0] = 1.0
        return w, 0.0
    n = np.arange(dim)
    w = (nbar / (nbar + 1)) ** n / (nbar + 1)
    lost = 1.0 - w.sum()
    return w / w.sum(), float(lost)


def propagate(seq: PhaseSequence, modes: Sequence[ModeSpec], drive: DriveSpec,
              state: QubitPairState, cfg: FockConfig | None = None,
              noise_trace=None, pair: tuple[int, int] = (1, 2)) -> ReducedQubitState:
    """Propagate and trace out the oscillators.

    ``noise_trace`` (a ``NoiseRealization``) adds ``Omega_e(t)`` to the
    Rabi rate of both qubits, linearly interpolated to step midpoints.
    """
    cfg = cfg or FockConfig()
    included = [m for m in modes if cfg.modes is None or m.index in cfg.modes]
    if not included:
        raise ValueError("no modes selected")
    dim = cfg.n_max + 1
    lam, vec = _quadrature_eig(dim)
    vec_h = vec.conj().T
    levels = np.arange(dim)

    k_sub = cfg.steps_per_segment(seq.step)
    dt = seq.step / k_sub
    ell = np.repeat(np.arange(seq.n_segments), k_sub)
    t_mid = (np.arange(seq.n_segments * k_sub) + 0.5) * dt
    rabi_q = np.array([drive.rabi_for(pair[0]), drive.rabi_for(pair[1])])
    omega_t = np.outer(np.ones_like(t_mid), rabi_q)
    if noise_trace is not None:
        extra = np.interp(t_mid, noise_trace.times, noise_trace.samples)
        omega_t = omega_t + extra[:, None]
    phase_t = seq.phase_array[ell]

    p_sector = state.probabilities
    overlaps = np.ones((4, 4), dtype=complex)
    top_pop = 0.0
    norm_err = 0.0
    truncation = 0.0
    for mode in included:
        eta = np.array([mode.coupling(pair[0]), mode.coupling(pair[1])])
        if cfg.initial == "vacuum":
            weights, lost = _thermal_weights(0.0, dim)
        else:
            weights, lost = _thermal_weights(mode.mean_occupation, dim)
        truncation = max(truncation, lost)
        cols = np.nonzero(weights > 1e-16)[0]
        w = weights[cols]
        psi = np.zeros((4, dim, cols.size), dtype=complex)
        psi[:, cols, np.arange(cols.size)] = 1.0
        # G_s(t) = -(i/2) * sum_mu s_mu Omega_mu(t) eta_mu * exp(i(delta t - phi))
        drive_amp = SPIN_SIGNS @ (omega_t * eta).T  # (4, steps)
        g = -0.5j * drive_amp * np.exp(1j * (mode.detuning * t_mid - phase_t))
        mag = np.abs(g) * dt
        theta = np.angle(g)
        for j in range(t_mid.size):
            rot = np.exp(1j * np.outer(theta[:, j], levels))  # (4, dim)
            kick = np.exp(-1j * np.outer(mag[:, j], lam))
            tmp = np.einsum("ij,sjc->sic", vec_h, psi / rot[:, :, None])
            psi = rot[:, :, None] * np.einsum("ij,sjc->sic", vec, kick[:, :, None] * tmp)
        norms = np.sum(np.abs(psi) ** 2, axis=1)  # (4, cols)
        norm_err = max(norm_err, float(np.max(np.abs(norms - 1))))
        top_pop = max(top_pop, float(np.max(np.abs(psi[:, -1, :]) ** 2 @ w)))
        # O[s, s'] = sum_n w_n <n| U_s'^dag U_s |n>
        overlaps *= np.einsum("c,sdc,tdc->st", w, psi, psi.conj())

    c = state.vector
    rho = np.outer(c, c.conj()) * overlaps
    sector = np.real(np.diag(rho))
    return ReducedQubitState(
        rho=rho,
        top_population=top_pop,
        norm_error=norm_err,
        sector_drift=float(np.max(np.abs(sector - p_sector))),
        thermal_truncation=truncation,
        diagnostics={"steps_per_segment": k_sub, "dt": dt, "modes": [m.index for m in included]},
    )


def purity_loss_oracle(seq, modes, drive, state, cfg=None, noise_trace=None,
                       pair=(1, 2)) -> float:
    """``1 - Tr[rho_S**2]`` from ``propagate``.

    Emits a ``RuntimeWarning`` when the top Fock level carries more than
    ``LEAKAGE_THRESHOLD`` population.
    """
    out = propagate(seq, modes, drive, state, cfg, noise_trace, pair)
    if not out.reliable:
        import warnings
        warnings.warn(f"Fock truncation leakage {out.top_population:.2e} exceeds "
                      f"{LEAKAGE_THRESHOLD:g}; result unreliable", RuntimeWarning, stacklevel=2)
    return out.purity_loss


def extract_entangling_phase(rho: np.ndarray, state: QubitPairState) -> float:
    """Read ``phi_12`` off the ``|00><01|`` coherence of a decoupled gate.

    With all trajectories closed each spin sector only picks up the phase
    ``sum_{mu,nu} s_mu s_nu phi_mu_nu``, and sectors ``00`` and ``01``
    differ by ``4 phi_12``. Valid for ``|phi_12| < pi/4``.
    """
    c = state.vector
    if abs(c[0]) < 1e-8 or abs(c[1]) < 1e-8:
        raise ValueError("state needs weight on both |00> and |01> to read the phase")
    return float(np.angle(rho[0, 1] / (c[0] * np.conj(c[1]))) / 4)
