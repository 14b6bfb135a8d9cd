import math

import numpy as np
import pytest

from phasegate.model import (SPIN_SIGNS, ModeSpec, PhaseSequence, QubitPairState, SpectrumNoise,
                             initial_state_from_z_label)
from phasegate.noisekit import (PreconditionError, check_decoupled, dk_weights, filter_curves,
                                filter_function, generate_noise, low_frequency_slope,
                                purity_loss_from_alphas, purity_loss_mc, purity_loss_spectral,
                                realization_alphas, realization_seed)
from phasegate.seqsynth import apply_R, base_sequence, synth_full

from conftest import KHZ

ETA = 0.05


def two_modes():
    return [ModeSpec(1, KHZ * 59.77, 2 * math.pi * 3e6, 0.0, (0.05, 0.05)),
            ModeSpec(2, KHZ * 40.26, 2 * math.pi * 3e6, 0.0, (0.05, -0.04))]


@pytest.fixture
def decoupled():
    modes = two_modes()
    return synth_full(modes, 10e-6), modes


def unit_white():
    return SpectrumNoise("white", 1.0, 2 * math.pi * 150e3)


def scaled_to(seq, modes, state, target):
    unit = unit_white()
    return unit.scaled(target / purity_loss_spectral(seq, modes, state, unit).value)


# -- filter functions -------------------------------------------------------

def test_filter_single_segment_peak():
    seq = PhaseSequence(3e-6, (0.4,))
    d = 1.7e5
    assert filter_function(seq, d, -d) == pytest.approx(seq.step**2, rel=1e-14)


def test_filter_vanishes_at_zero_for_closed_mode(decoupled):
    seq, modes = decoupled
    for m in modes:
        assert filter_function(seq, m.detuning, 0.0) <= 1e-16 * seq.duration**2


@pytest.mark.parametrize("m", [1, 2, 3])
def test_slopes_for_R_powers(m):
    step, d = 10e-6, 2 * math.pi * 37.3e3
    seq = base_sequence(step)
    for _ in range(m):
        seq = apply_R(seq, d)
    assert low_frequency_slope(seq, d) == pytest.approx(2 * m, abs=0.2)


def test_filter_curves_shape(decoupled):
    seq, modes = decoupled
    w = np.linspace(-1e6, 1e6, 11)
    c = filter_curves(seq, modes, w, initial_state_from_z_label("11"))
    assert c.values.shape == (2, 11)
    assert np.allclose(c.combined, c.weights @ c.values)
    assert np.array_equal(filter_curves(seq, modes, w).weights, [1, 1])


# -- D_k --------------------------------------------------------------------

def brute_dk(mode, state):
    p = state.probabilities
    eta = np.array(mode.couplings[:2])
    total = 0.0
    for s in range(4):
        for t in range(4):
            total += p[s] * p[t] * ((SPIN_SIGNS[s] - SPIN_SIGNS[t]) @ eta) ** 2
    return mode.thermal_factor * total


def test_dk_x_basis_state_is_zero():
    state = QubitPairState((1, 0, 0, 0))
    assert dk_weights(two_modes(), state).tolist() == [0.0, 0.0]


def test_dk_golden_11z():
    # |11>_z, nbar = 0, equal couplings: 16-term sum gives 4 eta^2 (= 0.01 for eta = 0.05)
    m = ModeSpec(1, 1.0, 1.0, 0.0, (ETA, ETA))
    state = initial_state_from_z_label("11")
    assert brute_dk(m, state) == pytest.approx(0.01, rel=1e-14)
    assert dk_weights([m], state)[0] == pytest.approx(4 * ETA**2, rel=1e-14)


def test_dk_thermal_factor():
    state = initial_state_from_z_label("11")
    for nbar in (0.0, 0.3, 2.0):
        a = dk_weights([ModeSpec(1, 1.0, 1.0, nbar, (0.05, -0.02))], state)[0]
        b = dk_weights([ModeSpec(1, 1.0, 1.0, nbar + 1, (0.05, -0.02))], state)[0]
        assert b / a == pytest.approx((2 * nbar + 3) / (2 * nbar + 1), rel=1e-13)


def test_dk_vs_brute_random(rng):
    for _ in range(50):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        state = QubitPairState(tuple(c / np.linalg.norm(c)))
        m = ModeSpec(1, 1.0, 1.0, rng.uniform(0, 3), tuple(rng.normal(0, 0.1, 2)))
        assert dk_weights([m], state)[0] == pytest.approx(brute_dk(m, state), abs=1e-15)


# -- spectral purity --------------------------------------------------------

def test_spectral_zero_noise(decoupled):
    seq, modes = decoupled
    zero = SpectrumNoise("white", 0.0, 1e6)
    assert purity_loss_spectral(seq, modes, initial_state_from_z_label("11"), zero).value == 0


def test_spectral_linear_in_psd(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    a = purity_loss_spectral(seq, modes, state, unit_white()).value
    b = purity_loss_spectral(seq, modes, state, unit_white().scaled(7.5)).value
    assert b == pytest.approx(7.5 * a, rel=1e-12)


def test_spectral_self_convergence(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    a = purity_loss_spectral(seq, modes, state, unit_white()).value
    b = purity_loss_spectral(seq, modes, state, unit_white(), resolution=2.0).value
    assert a == pytest.approx(b, rel=1e-6)


def test_spectral_vs_dense_trapezoid(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    noise = SpectrumNoise("one_over_f", 3.0, 2 * math.pi * 200e3, 2 * math.pi * 100.0)
    got = purity_loss_spectral(seq, modes, state, noise).value
    w = np.linspace(-noise.high_cutoff, noise.high_cutoff, 2_000_001)
    d = dk_weights(modes, state)
    f = sum(dk * filter_function(seq, m.detuning, w) for dk, m in zip(d, modes))
    ref = np.trapezoid(noise.psd(w) * f, w) / (8 * math.pi)
    assert got == pytest.approx(ref, rel=1e-3)


def test_spectral_refuses_open_sequence():
    modes = two_modes()
    seq = PhaseSequence(10e-6, (0.0, 1.0))
    with pytest.raises(PreconditionError) as info:
        purity_loss_spectral(seq, modes, initial_state_from_z_label("11"), unit_white())
    assert set(info.value.residuals) == {1, 2}
    with pytest.raises(PreconditionError):
        check_decoupled(seq, modes)


def test_spectral_needs_cutoff(decoupled):
    seq, modes = decoupled
    with pytest.raises(ValueError, match="cutoff"):
        purity_loss_spectral(seq, modes, initial_state_from_z_label("11"),
                             SpectrumNoise("white", 1.0))


# -- noise synthesis --------------------------------------------------------

def test_noise_zero_amplitude():
    tr = generate_noise(SpectrumNoise("white", 0.0, 1e5), 1e-4, 1e-6, seed=3)
    assert not np.any(tr.samples)
    assert tr.times[0] == 0 and tr.times[-1] == pytest.approx(1e-4)
    assert tr.dt == pytest.approx(1e-6)


def test_noise_deterministic():
    n = SpectrumNoise("white", 2.0, 1e5)
    a = generate_noise(n, 1e-4, 1e-6, seed=42)
    b = generate_noise(n, 1e-4, 1e-6, seed=42)
    assert np.array_equal(a.samples, b.samples)
    c = generate_noise(n, 1e-4, 1e-6, seed=realization_seed(42, 0))
    d = generate_noise(n, 1e-4, 1e-6, seed=realization_seed(42, 0))
    assert np.array_equal(c.samples, d.samples)


def test_noise_requires_resolved_cutoff():
    with pytest.raises(ValueError, match="resolve"):
        generate_noise(SpectrumNoise("white", 1.0, 1e6), 1e-4, 1e-5)


def test_noise_parseval_variance():
    amp, hi = 2.0, 2 * math.pi * 100e3
    noise = SpectrumNoise("white", amp, hi)
    expected = amp * hi / math.pi  # (1/2pi) int_{-hi}^{hi} S dw
    samples = np.concatenate([generate_noise(noise, 1e-4, 2e-6, seed=s).samples
                              for s in range(500)])
    assert samples.var() == pytest.approx(expected, rel=0.05)


def test_noise_periodogram_matches_psd():
    amp, hi = 1.0, 2 * math.pi * 50e3
    noise = SpectrumNoise("power_law", amp, hi, 2 * math.pi * 1e3, exponent=-1.0)
    dt, dur = 2e-6, 2e-3
    acc = None
    for s in range(300):
        x = generate_noise(noise, dur, dt, seed=s, pad=2).samples[:-1]
        p = dt / x.size * np.abs(np.fft.rfft(x)) ** 2
        acc = p if acc is None else acc + p
    acc /= 300
    w = 2 * math.pi * np.fft.rfftfreq(x.size, dt)
    band = (w > 4 * noise.low_cutoff) & (w < 0.8 * hi)
    ratio = acc[band] / noise.psd(w[band])
    # average over coarse blocks to suppress residual scatter
    blocks = np.array_split(ratio, 10)
    assert all(abs(b.mean() - 1) < 0.10 for b in blocks)


# -- Monte Carlo ------------------------------------------------------------

def test_mc_zero_noise(decoupled):
    seq, modes = decoupled
    out = purity_loss_mc(seq, modes, None, initial_state_from_z_label("11"),
                         SpectrumNoise("white", 0.0, 1e6), 20)
    assert (out.mean, out.stderr) == (0.0, 0.0)


def test_mc_weak_noise_agrees_with_spectral(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    noise = scaled_to(seq, modes, state, 1e-3)
    spec = purity_loss_spectral(seq, modes, state, noise).value
    mc = purity_loss_mc(seq, modes, None, state, noise, 1000, seed=5)
    assert abs(mc.mean - spec) <= 3 * mc.stderr
    assert abs(mc.mean - spec) <= 0.1 * spec


def test_mc_strong_noise_below_spectral(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    for target in np.geomspace(0.1, 5.0, 20):
        noise = scaled_to(seq, modes, state, target)
        mc = purity_loss_mc(seq, modes, None, state, noise, 100, seed=1)
        assert mc.mean < target


def test_mc_thread_count_independent(decoupled):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    noise = scaled_to(seq, modes, state, 1e-3)
    a = purity_loss_mc(seq, modes, None, state, noise, 64, seed=9, threads=1)
    b = purity_loss_mc(seq, modes, None, state, noise, 64, seed=9, threads=4)
    assert np.array_equal(a.values, b.values)


def test_mc_env_threads(decoupled, monkeypatch):
    seq, modes = decoupled
    state = initial_state_from_z_label("11")
    noise = scaled_to(seq, modes, state, 1e-3)
    a = purity_loss_mc(seq, modes, None, state, noise, 16, seed=2)
    monkeypatch.setenv("PHASEGATE_THREADS", "3")
    b = purity_loss_mc(seq, modes, None, state, noise, 16, seed=2)
    assert np.array_equal(a.values, b.values)


def test_mc_refuses_open_sequence():
    with pytest.raises(PreconditionError):
        purity_loss_mc(PhaseSequence(10e-6, (0.0,)), two_modes(), None,
                       initial_state_from_z_label("11"), unit_white(), 4)


def test_purity_from_alphas_limits(rng):
    modes = two_modes()
    state = initial_state_from_z_label("11")
    assert purity_loss_from_alphas(np.zeros((2, 2)), modes, state) == 0.0
    # a single product state in the spin basis cannot lose purity
    alphas = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    assert purity_loss_from_alphas(alphas, modes, QubitPairState((0, 1, 0, 0))) == 0.0
    # huge displacements fully decohere: P -> 1 - sum p^2
    p = state.probabilities
    assert purity_loss_from_alphas(1e3 * alphas, modes, state) == pytest.approx(1 - p @ p)


def test_realization_alphas_vs_quadrature(decoupled):
    """Trapezoid kernel against a dense independent integration of the same trace."""
    seq, modes = decoupled
    noise = unit_white().scaled(1e4)
    tr = generate_noise(noise, seq.duration, seq.step / 64, seed=4)
    got = realization_alphas(seq, modes, tr)
    t = np.linspace(0, seq.duration, 200_001)
    x = np.interp(t, tr.times, tr.samples)
    r = seq.modulation(np.minimum(t, seq.duration * (1 - 1e-15)))
    for k, m in enumerate(modes):
        ref = np.trapezoid(x * np.exp(1j * m.detuning * t) * r, t)
        eta = np.array(m.couplings)
        # trapezoid error is O((delta dt)^2 / 12) ~ 3e-4 at 64 samples per step
        assert np.allclose(got[k], -0.5j * eta * ref, rtol=1e-3, atol=0)
