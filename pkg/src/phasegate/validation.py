"""Oracle suite behind ``phasegate validate``.

Every check compares an analytic result with an independent numerical
route and records the measured discrepancy against a fixed tolerance.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import reduce
from typing import Callable

import numpy as np

from .entangler import calibrate_rabi, entangling_phase, entangling_phase_quadrature
from .fockoracle import FockConfig, extract_entangling_phase, propagate
from .model import (SPIN_SIGNS, ConcatRecipe, DriveSpec, ModeSpec, PhaseSequence,
                    QubitPairState, SpectrumNoise, initial_state_from_z_label)
from .noisekit import (dk_weights, generate_noise, low_frequency_slope, purity_loss_from_alphas,
                       purity_loss_mc, purity_loss_spectral, realization_purity_loss)
from .phasespace import (closure_residual, monomial_scale, normalized_residual,
                         weighted_residual, weighted_residual_quad)
from .seqsynth import apply_R, base_sequence, binary_phases, synth_full, synth_recipe

KHZ = 2 * math.pi * 1e3
CHAIN_DETUNINGS_KHZ = (59.77, 40.26, 11.06, -20.07, -59.77)


@dataclass
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""

    def __post_init__(self):
        self.measured = float(self.measured)
        self.passed = bool(self.passed)


def chain_modes(couplings=(0.05, 0.05)) -> list[ModeSpec]:
    # mode frequencies are illustrative; only detunings enter the closure
    return [ModeSpec(k + 1, KHZ * d, 2 * math.pi * 3e6, 0.0, couplings)
            for k, d in enumerate(CHAIN_DETUNINGS_KHZ)]


def random_modes(rng, m, step, spread=4 * math.pi):
    return [ModeSpec(k + 1, rng.uniform(-spread, spread) / step, 2 * math.pi * 1e6, 0.0,
                     tuple(rng.normal(0, 0.1, 2))) for k in range(m)]


def _wrap(x):
    return np.abs(np.angle(np.exp(1j * np.asarray(x))))


def check_fold_equivalence(rng) -> Check:
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 7))
        step = rng.uniform(1e-6, 5e-5)
        modes = random_modes(rng, m, step)
        closed = binary_phases([md.detuning for md in modes], step)
        fold = reduce(apply_R, [md.detuning for md in modes], base_sequence(step))
        worst = max(worst, float(np.max(_wrap(closed - fold.phase_array))))
    return Check("binary-index phases equal apply_R fold", worst, 1e-12, worst <= 1e-12)


def check_chain_closure() -> Check:
    modes = chain_modes()
    step = 2 * math.pi / modes[0].detuning
    seq = synth_recipe(ConcatRecipe((1, 2, 3), step), modes)
    res = {m.index: normalized_residual(seq, m.detuning) for m in modes}
    worst = max(res[k] for k in (1, 2, 3, 5))
    return Check("five-mode chain sequence closes modes 1,2,3,5", worst, 1e-9, worst <= 1e-9,
                 f"mode 4 normalized residual {res[4]:.4g}")


def check_r_closure(rng) -> Check:
    worst = 0.0
    for _ in range(200):
        step = rng.uniform(1e-6, 5e-5)
        seq = PhaseSequence(step, tuple(rng.uniform(0, 2 * math.pi, int(rng.integers(1, 17)))))
        d = rng.uniform(-6 * math.pi, 6 * math.pi) / step
        out = apply_R(seq, d)
        worst = max(worst, abs(closure_residual(out, d)) / out.duration)
    return Check("apply_R closes its own detuning", worst, 1e-12, worst <= 1e-12)


def check_order_property(rng) -> Check:
    worst, weakest = 0.0, math.inf
    for m in range(1, 5):
        for _ in range(50):
            d = rng.uniform(0.5, 5.5)
            step = rng.uniform(0.5, 2.0)
            d /= step
            seq = base_sequence(step)
            for _ in range(m):
                seq = apply_R(seq, d)
            for j in range(m + 1):
                beta = [0.0] * j + [1.0]
                rel = abs(weighted_residual(seq, d, beta)) / monomial_scale(seq.duration, j)
                if j < m:
                    worst = max(worst, rel)
                else:
                    weakest = min(weakest, rel)
    ok = worst <= 1e-10 and weakest > 1e-8
    return Check("R^m orthogonal to degree < m", worst, 1e-10, ok,
                 f"smallest degree-m residual {weakest:.3g}")


def check_weighted_vs_quad(rng) -> Check:
    worst = 0.0
    for _ in range(20):
        step = rng.uniform(0.2, 1.0)
        seq = PhaseSequence(step, tuple(rng.uniform(0, 2 * math.pi, int(rng.integers(1, 9)))))
        d = rng.uniform(-8, 8)
        beta = rng.normal(size=int(rng.integers(1, 4)))
        a = weighted_residual(seq, d, beta)
        b = weighted_residual_quad(seq, d, beta)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    return Check("weighted residual vs adaptive quadrature", worst, 1e-8, worst <= 1e-8)


def check_entangler(rng, n=200) -> Check:
    worst = 0.0
    for _ in range(n):
        step = rng.uniform(1e-6, 3e-5)
        modes = random_modes(rng, int(rng.integers(1, 6)), step)
        seq = PhaseSequence(step, tuple(rng.uniform(0, 4 * math.pi, int(rng.integers(1, 33)))))
        drive = DriveSpec(rng.uniform(1e4, 1e6))
        a = entangling_phase(seq, modes, drive).total
        b = entangling_phase_quadrature(seq, modes, drive)
        worst = max(worst, abs(a - b) / abs(b))
    return Check("entangling phase closed form vs quadrature", worst, 1e-8, worst <= 1e-8)


def check_calibration(rng, n=50) -> Check:
    worst = 0.0
    for _ in range(n):
        step = rng.uniform(1e-6, 3e-5)
        modes = random_modes(rng, int(rng.integers(1, 4)), step)
        seq = synth_full(modes, step)
        unit = entangling_phase(seq, modes, DriveSpec(1.0)).total
        target = math.copysign(math.pi / 8, unit)
        omega = calibrate_rabi(seq, modes, (1, 2), target)
        got = entangling_phase(seq, modes, DriveSpec(omega)).total
        worst = max(worst, abs(got - target) / abs(target))
    return Check("calibration round trip", worst, 1e-12, worst <= 1e-12)


def orders_321_sequence():
    """Orders 3, 2, 1 on three modes; step chosen so no mode self-closes."""
    modes = chain_modes()[:3]
    step = 10e-6
    seq = synth_recipe(ConcatRecipe((1, 2, 3, 1, 2, 1), step), modes)
    return seq, modes


def check_filter_slopes() -> Check:
    seq, modes = orders_321_sequence()
    slopes = [low_frequency_slope(seq, m.detuning) for m in modes]
    expected = [6, 4, 2]
    worst = max(abs(s - e) for s, e in zip(slopes, expected))
    return Check("filter-function low-frequency slopes 2m", worst, 0.2, worst <= 0.2,
                 "slopes " + ", ".join(f"{s:.3f}" for s in slopes))


def check_dk(rng) -> Check:
    worst = 0.0
    for _ in range(50):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        c /= np.linalg.norm(c)
        state = QubitPairState(tuple(c))
        m = ModeSpec(1, 1.0, 1.0, rng.uniform(0, 2), tuple(rng.normal(0, 0.1, 2)))
        p = np.abs(c) ** 2
        brute = 0.0
        for s in range(4):
            for t in range(4):
                diff = (SPIN_SIGNS[s] - SPIN_SIGNS[t]) @ np.array(m.couplings)
                brute += p[s] * p[t] * diff ** 2
        brute *= m.thermal_factor
        worst = max(worst, abs(dk_weights([m], state)[0] - brute))
    return Check("D_k closed form vs 16-term sum", worst, 1e-12, worst <= 1e-12)


def two_mode_setup():
    modes = [ModeSpec(1, KHZ * 59.77, 2 * math.pi * 3e6, 0.0, (0.05, 0.05)),
             ModeSpec(2, KHZ * 40.26, 2 * math.pi * 3e6, 0.0, (0.05, -0.04))]
    seq = synth_full(modes, 10e-6)
    return seq, modes


def check_mc_vs_spectral(threads=1, n=500) -> Check:
    seq, modes = two_mode_setup()
    state = initial_state_from_z_label("11")
    unit = SpectrumNoise("white", 1.0, 2 * math.pi * 150e3)
    noise = unit.scaled(1e-3 / purity_loss_spectral(seq, modes, state, unit).value)
    spec = purity_loss_spectral(seq, modes, state, noise).value
    mc = purity_loss_mc(seq, modes, None, state, noise, n, seed=11, threads=threads)
    z = abs(mc.mean - spec) / mc.stderr
    return Check("Monte-Carlo vs spectral purity loss (z-score)", z, 3.0, z <= 3.0,
                 f"mc {mc.mean:.4e} +- {mc.stderr:.1e}, spectral {spec:.4e}")


def check_fock() -> list[Check]:
    state = initial_state_from_z_label("11")
    seq, modes = two_mode_setup()
    unit = entangling_phase(seq, modes, DriveSpec(1.0)).total
    drive = DriveSpec(calibrate_rabi(seq, modes, (1, 2), math.copysign(0.1, unit)))
    fine = FockConfig(n_max=12, dt=seq.step / 1000)
    out = propagate(seq, modes, drive, state, fine)
    checks = [Check("Fock oracle: closed sequence purity loss", abs(out.purity_loss), 1e-8,
                    abs(out.purity_loss) <= 1e-8)]
    err = abs(extract_entangling_phase(out.rho, state) - entangling_phase(seq, modes, drive).total)
    checks.append(Check("Fock oracle: entangling phase [rad]", err, 1e-6, err <= 1e-6))

    open_seq = PhaseSequence(10e-6, (0.0, 0.7, 1.9))
    one = modes[:1]
    d = DriveSpec(2 * math.pi * 50e3)
    alphas = np.array([[-0.5j * d.rabi_rate * e * closure_residual(open_seq, one[0].detuning)
                        for e in one[0].couplings]])
    analytic = purity_loss_from_alphas(alphas, one, state)
    got = propagate(open_seq, one, d, state, FockConfig(n_max=20, dt=open_seq.step / 1000))
    err = abs(got.purity_loss - analytic)
    checks.append(Check("Fock oracle: open-trajectory purity vs analytic", err, 1e-6, err <= 1e-6))

    unit_noise = SpectrumNoise("white", 1.0, 2 * math.pi * 150e3)
    noise = unit_noise.scaled(1e-3 / purity_loss_spectral(seq, modes, state, unit_noise).value)
    worst = 0.0
    for s in range(2):
        trace = generate_noise(noise, seq.duration, seq.step / 256, s)
        a = realization_purity_loss(seq, modes, state, trace)
        b = propagate(seq, modes, drive, state, FockConfig(n_max=12, dt=seq.step / 1024),
                      noise_trace=trace).purity_loss
        worst = max(worst, abs(a - b))
    checks.append(Check("Fock oracle: noisy per-realization purity", worst, 1e-6, worst <= 1e-6))
    return checks


def run_validation(threads: int = 1, seed: int = 2024,
                   progress: Callable[[Check], None] | None = None) -> list[Check]:
    rng = np.random.default_rng(seed)
    steps = [
        lambda: check_fold_equivalence(rng),
        check_chain_closure,
        lambda: check_r_closure(rng),
        lambda: check_order_property(rng),
        lambda: check_weighted_vs_quad(rng),
        lambda: check_entangler(rng),
        lambda: check_calibration(rng),
        check_filter_slopes,
        lambda: check_dk(rng),
        lambda: check_mc_vs_spectral(threads),
        check_fock,
    ]
    results: list[Check] = []
    for step in steps:
        out = step()
        for c in out if isinstance(out, list) else [out]:
            results.append(c)
            if progress is not None:
                progress(c)
    return results


def as_records(checks: list[Check]) -> list[dict]:
    return [asdict(c) for c in checks]
