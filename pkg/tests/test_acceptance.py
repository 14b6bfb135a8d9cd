"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Lines are collected in ``conftest.ACCEPTANCE_LINES`` and echoed in the
terminal summary, and also printed immediately (visible with ``-s``).
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, CHAIN_KHZ, KHZ
from phasegate.entangler import calibrate_rabi, entangling_phase, entangling_phase_quadrature
from phasegate.fockoracle import FockConfig, extract_entangling_phase, propagate
from phasegate.model import (ConcatRecipe, DriveSpec, ModeSpec, PhaseSequence, SpectrumNoise,
                             initial_state_from_z_label)
from phasegate.noisekit import (generate_noise, low_frequency_slope, purity_loss_from_alphas,
                                purity_loss_mc, purity_loss_spectral, realization_purity_loss)
from phasegate.phasespace import (closure_residual, monomial_scale, normalized_residual,
                                  weighted_residual)
from phasegate.seqsynth import apply_R, base_sequence, synth_full, synth_recipe

# reference table, units of pi
REFERENCE_PHASES = (0.0, 1.0, 1.694, 1.694, 0.4803, 1.4803, 2.175, 3.175)


def report(n, name, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {name}  ({detail})"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


def chain():
    modes = [ModeSpec(k + 1, KHZ * d, 2 * math.pi * 3e6, 0.0, (0.05, 0.05))
             for k, d in enumerate(CHAIN_KHZ)]
    step = 2 * math.pi / modes[0].detuning
    return synth_recipe(ConcatRecipe((1, 2, 3), step), modes), modes


def two_modes():
    modes = [ModeSpec(1, KHZ * 59.77, 2 * math.pi * 3e6, 0.0, (0.05, 0.05)),
             ModeSpec(2, KHZ * 40.26, 2 * math.pi * 3e6, 0.0, (0.05, -0.04))]
    return synth_full(modes, 10e-6), modes


def test_criterion_1_phase_table():
    t0 = time.perf_counter()
    seq, _ = chain()
    got = seq.phase_array / math.pi
    runtime = time.perf_counter() - t0
    err = np.abs(got - REFERENCE_PHASES)
    worst = int(np.argmax(err))
    ok = err.max() <= 1e-3 and runtime < 1.0
    report(1, "eight-phase table within 1e-3 pi", ok,
           f"max |diff| = {err.max():.4f} pi at l={worst} "
           f"(computed {got[worst]:.4f} pi, reference {REFERENCE_PHASES[worst]} pi); "
           f"runtime {runtime:.3f} s")


def test_criterion_2_duration():
    seq, _ = chain()
    tau = seq.duration
    exact = 8 * 2 * math.pi / (KHZ * CHAIN_KHZ[0])
    # "~133.9 us" is matched to its last quoted digit; the 5% level is against ~140 us
    ok = (abs(tau - exact) <= 1e-12 * exact and abs(tau - 133.9e-6) <= 0.1e-6
          and abs(tau / 140e-6 - 1) <= 0.05)
    report(2, "gate duration 8 tau_s ~ 133.9 us vs ~140 us", ok,
           f"{seq.n_segments} segments, {tau * 1e6:.3f} us, {100 * (tau / 140e-6 - 1):+.1f}% vs 140 us")


def test_criterion_3_closure():
    t0 = time.perf_counter()
    seq, modes = chain()
    res = {m.index: normalized_residual(seq, m.detuning) for m in modes}
    runtime = time.perf_counter() - t0
    worst = max(res[k] for k in (1, 2, 3, 5))
    ok = worst <= 1e-9 and runtime < 1.0
    report(3, "closure of modes 1,2,3,5", ok,
           f"max |delta alpha| = {worst:.2e}; mode 4 residual {res[4]:.4f} (reported); "
           f"runtime {runtime:.3f} s")


def test_criterion_4_order_property():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    worst, weakest = 0.0, math.inf
    for m in range(1, 5):
        for _ in range(50):
            step = rng.uniform(0.5, 2.0)
            d = rng.uniform(0.5, 5.5) / step
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
    runtime = time.perf_counter() - t0
    ok = worst <= 1e-10 and weakest > 0 and runtime < 10
    report(4, "R^m orthogonal to t^j, j < m", ok,
           f"max rel residual {worst:.2e}, min degree-m residual {weakest:.2e}; "
           f"runtime {runtime:.2f} s")


def test_criterion_5_entangler_oracle():
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        step = rng.uniform(1e-6, 3e-5)
        modes = [ModeSpec(k + 1, rng.uniform(-4 * math.pi, 4 * math.pi) / step, 1e7, 0.0,
                          tuple(rng.normal(0, 0.1, 2))) for k in range(int(rng.integers(1, 6)))]
        seq = PhaseSequence(step, tuple(rng.uniform(0, 4 * math.pi, int(rng.integers(1, 33)))))
        drive = DriveSpec(rng.uniform(1e4, 1e6))
        a = entangling_phase(seq, modes, drive).total
        b = entangling_phase_quadrature(seq, modes, drive)
        worst = max(worst, abs(a - b) / abs(b))
    runtime = time.perf_counter() - t0
    ok = worst <= 1e-8 and runtime < 30
    report(5, "entangling phase closed form vs quadrature", ok,
           f"max rel diff {worst:.2e} over 200 instances; runtime {runtime:.2f} s")


def test_criterion_6_calibration():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(50):
        step = rng.uniform(1e-6, 3e-5)
        modes = [ModeSpec(k + 1, rng.uniform(-4 * math.pi, 4 * math.pi) / step, 1e7, 0.0,
                          tuple(rng.normal(0, 0.1, 2))) for k in range(int(rng.integers(1, 4)))]
        seq = synth_full(modes, step)
        unit = entangling_phase(seq, modes, DriveSpec(1.0)).total
        target = math.copysign(math.pi / 8, unit)
        omega = calibrate_rabi(seq, modes, target=target)
        got = entangling_phase(seq, modes, DriveSpec(omega)).total
        worst = max(worst, abs(got - target) / abs(target))
    report(6, "calibration round trip", worst <= 1e-12,
           f"max rel error {worst:.2e} over 50 instances")


def test_criterion_7_filter_slopes():
    t0 = time.perf_counter()
    modes = [ModeSpec(k + 1, KHZ * d, 2 * math.pi * 3e6, 0.0, (0.05, 0.05))
             for k, d in enumerate(CHAIN_KHZ[:3])]
    # mode 1 applied 3 times, mode 2 twice, mode 3 once
    seq = synth_recipe(ConcatRecipe((1, 2, 3, 1, 2, 1), 10e-6), modes)
    by_order = {3: modes[0], 2: modes[1], 1: modes[2]}
    slopes = {m: low_frequency_slope(seq, mode.detuning) for m, mode in by_order.items()}
    runtime = time.perf_counter() - t0
    increasing = slopes[1] < slopes[2] < slopes[3]
    within = all(abs(slopes[m] - 2 * m) <= 0.2 for m in slopes)
    ok = increasing and within and runtime < 10
    report(7, "low-frequency slopes 2m for orders 1, 2, 3", ok,
           "slopes " + ", ".join(f"m={m}: {slopes[m]:.3f}" for m in (1, 2, 3))
           + f"; runtime {runtime:.2f} s")


def test_criterion_8_purity_cross_validation():
    t0 = time.perf_counter()
    seq, modes = two_modes()
    state = initial_state_from_z_label("11")
    unit = SpectrumNoise("white", 1.0, 2 * math.pi * 150e3)
    noise = unit.scaled(1e-3 / purity_loss_spectral(seq, modes, state, unit).value)
    spec = purity_loss_spectral(seq, modes, state, noise).value
    mc = purity_loss_mc(seq, modes, None, state, noise, 2000, seed=2024)
    z = abs(mc.mean - spec) / mc.stderr
    rel = abs(mc.mean - spec) / spec
    # 30x the rms amplitude is 900x the PSD
    strong = noise.scaled(30.0**2)
    spec_s = purity_loss_spectral(seq, modes, state, strong).value
    mc_s = purity_loss_mc(seq, modes, None, state, strong, 2000, seed=2025)
    runtime = time.perf_counter() - t0
    ok = z <= 3 and rel <= 0.10 and mc_s.mean < spec_s and runtime < 300
    report(8, "Monte Carlo vs spectral purity loss", ok,
           f"weak: MC {mc.mean:.4e} +- {mc.stderr:.1e} vs {spec:.4e} ({z:.2f} SE, {100 * rel:.1f}%); "
           f"30x amplitude: MC {mc_s.mean:.3f} < spectral {spec_s:.3f}; runtime {runtime:.1f} s")


def test_criterion_9_fock_oracle():
    t0 = time.perf_counter()
    state = initial_state_from_z_label("11")
    seq, modes = two_modes()
    drive = DriveSpec(calibrate_rabi(seq, modes, target=-0.1))
    fine = FockConfig(n_max=12, dt=seq.step / 1000)

    # (a) closed sequences: two modes together and mode 1 alone
    closed = propagate(seq, modes, drive, state, fine)
    one_seq = apply_R(base_sequence(10e-6), modes[0].detuning)
    one = propagate(one_seq, modes[:1], drive, state, FockConfig(n_max=12))
    worst_a = max(closed.purity_loss, one.purity_loss)

    # (b) analytic per-realization purity: open trajectories and noisy closed sequences
    open_seq = PhaseSequence(10e-6, (0.0, 0.7, 1.9))
    d = DriveSpec(2 * math.pi * 50e3)
    worst_b = 0.0
    for sub in (modes[:1], modes):
        alphas = np.array([[-0.5j * d.rabi_rate * e * closure_residual(open_seq, m.detuning)
                            for e in m.couplings] for m in sub])
        got = propagate(open_seq, sub, d, state, FockConfig(n_max=20, dt=open_seq.step / 1000))
        worst_b = max(worst_b, abs(got.purity_loss - purity_loss_from_alphas(alphas, sub, state)))
    unit = SpectrumNoise("white", 1.0, 2 * math.pi * 150e3)
    noise = unit.scaled(1e-3 / purity_loss_spectral(seq, modes, state, unit).value)
    for s in range(3):
        trace = generate_noise(noise, seq.duration, seq.step / 256, s)
        a = realization_purity_loss(seq, modes, state, trace)
        b = propagate(seq, modes, drive, state, FockConfig(n_max=12, dt=seq.step / 1024),
                      noise_trace=trace).purity_loss
        worst_b = max(worst_b, abs(a - b))

    # (c) entangling phase
    err_c = abs(extract_entangling_phase(closed.rho, state)
                - entangling_phase(seq, modes, drive).total)
    runtime = time.perf_counter() - t0
    ok = worst_a <= 1e-8 and worst_b <= 1e-6 and err_c <= 1e-6 and runtime < 120
    report(9, "Fock-space oracle", ok,
           f"(a) closed P = {worst_a:.1e}; (b) max |dP| = {worst_b:.1e}; "
           f"(c) phase error {err_c:.1e} rad; runtime {runtime:.1f} s")
