"""Domain types and config ingestion.

All frequencies are stored internally as angular frequencies in rad/s and
all times in seconds. The config loader accepts explicit unit suffixes on
numeric keys (``detuning_khz``, ``tau_s_us``, ...); a frequency given as
``f`` kHz becomes ``2*pi*f*1e3`` rad/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

__all__ = [
    "ConfigError",
    "ModeSpec",
    "DriveSpec",
    "PhaseSequence",
    "ConcatRecipe",
    "QubitPairState",
    "PolynomialNoise",
    "SpectrumNoise",
    "Config",
    "initial_state_from_z_label",
    "load_config",
    "load_config_file",
    "dump_config",
    "mode_by_index",
]

TWO_PI = 2 * math.pi

# unit suffix -> multiplier to canonical unit
FREQUENCY_UNITS = {
    "rad_s": 1.0,
    "hz": TWO_PI,
    "khz": TWO_PI * 1e3,
    "mhz": TWO_PI * 1e6,
}
TIME_UNITS = {
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "ns": 1e-9,
}


class ConfigError(ValueError):
    """Schema, invariant or unit violation in a config document.

    ``path`` names the offending field, e.g. ``modes[2].detuning_khz``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModeSpec:
    """One bosonic oscillator mode.

    ``mean_occupation`` stands in for temperature; the purity formulas only
    need ``coth(hbar*omega/2kT) = 2*nbar + 1``. Couplings are signed
    Lamb-Dicke parameters, one per qubit (qubit ``mu`` is
    ``couplings[mu - 1]``).
    """

    index: int
    detuning: float
    mode_frequency: float
    mean_occupation: float = 0.0
    couplings: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        if not (isinstance(self.index, (int, np.integer)) and self.index >= 1):
            raise ValueError(f"mode index must be a positive integer, got {self.index!r}")
        if not math.isfinite(self.detuning):
            raise ValueError("detuning must be finite")
        if not (math.isfinite(self.mode_frequency) and self.mode_frequency > 0):
            raise ValueError("mode_frequency must be positive")
        if not (math.isfinite(self.mean_occupation) and self.mean_occupation >= 0):
            raise ValueError("mean_occupation must be >= 0")

    @property
    def thermal_factor(self) -> float:
        """``2*nbar + 1``."""
        return 2 * self.mean_occupation + 1

    def coupling(self, qubit: int) -> float:
        if not 1 <= qubit <= len(self.couplings):
            raise KeyError(f"mode {self.index} has no coupling for qubit {qubit}")
        return self.couplings[qubit - 1]


@dataclass(frozen=True)
class DriveSpec:
    rabi_rate: float
    driven_qubits: tuple[int, ...] = (1, 2)
    spin_axis: str = "x"

    def __post_init__(self):
        object.__setattr__(self, "driven_qubits", tuple(int(q) for q in self.driven_qubits))
        if not (math.isfinite(self.rabi_rate) and self.rabi_rate >= 0):
            raise ValueError("rabi_rate must be >= 0")
        if not self.driven_qubits:
            raise ValueError("driven_qubits must be non-empty")
        if len(set(self.driven_qubits)) != len(self.driven_qubits):
            raise ValueError("driven_qubits must be unique")
        if any(q < 1 for q in self.driven_qubits):
            raise ValueError("qubit indices are 1-based")
        if self.spin_axis not in ("x", "y", "z"):
            raise ValueError(f"spin_axis must be one of x, y, z, got {self.spin_axis!r}")

    def rabi_for(self, qubit: int) -> float:
        return self.rabi_rate if qubit in self.driven_qubits else 0.0

    def with_rabi(self, rabi_rate: float) -> "DriveSpec":
        return DriveSpec(rabi_rate, self.driven_qubits, self.spin_axis)


@dataclass(frozen=True)
class PhaseSequence:
    """Piecewise-constant phase modulation.

    Segment ``l`` spans ``[l*step, (l+1)*step]`` and carries the factor
    ``exp(-1j*phases[l])``. Phases are kept unreduced.
    """

    step: float
    phases: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        phases = tuple(float(p) for p in np.atleast_1d(np.asarray(self.phases, dtype=float)))
        object.__setattr__(self, "phases", phases)
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError("step duration must be finite and positive")
        if not phases:
            raise ValueError("a phase sequence needs at least one segment")
        if not all(math.isfinite(p) for p in phases):
            raise ValueError("phases must be finite")

    @property
    def n_segments(self) -> int:
        return len(self.phases)

    @property
    def duration(self) -> float:
        return self.n_segments * self.step

    @property
    def phase_array(self) -> np.ndarray:
        return np.asarray(self.phases)

    @property
    def boundaries(self) -> np.ndarray:
        return self.step * np.arange(self.n_segments + 1)

    def modulation(self, t) -> np.ndarray:
        """Evaluate ``r(t)`` (zero outside ``[0, duration)``)."""
        t = np.asarray(t, dtype=float)
        idx = np.floor(t / self.step).astype(int)
        inside = (idx >= 0) & (idx < self.n_segments)
        out = np.zeros(t.shape, dtype=complex)
        out[inside] = np.exp(-1j * self.phase_array[idx[inside]])
        return out


@dataclass(frozen=True)
class ConcatRecipe:
    """Mode indices in *application* order: ``k_1`` is applied first.

    ``ConcatRecipe((1, 3, 2, 3), step)`` builds ``R3 R2 R3 R1 r0``.
    """

    mode_indices: tuple[int, ...]
    step: float

    def __post_init__(self):
        object.__setattr__(self, "mode_indices", tuple(int(k) for k in self.mode_indices))
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError("step duration must be finite and positive")


@dataclass(frozen=True)
class QubitPairState:
    """Two-qubit pure state in the spin-axis eigenbasis.

    ``amplitudes[2*i + j]`` is ``c_ij``; basis state ``|i>`` has eigenvalue
    ``s_i = (-1)**i``.
    """

    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != 4:
            raise ValueError("a two-qubit state has four amplitudes")
        norm = sum(abs(a) ** 2 for a in amps)
        if abs(norm - 1) > 1e-12:
            raise ValueError(f"state is not normalized (sum |c|^2 = {norm!r})")

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.amplitudes, dtype=complex)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.vector) ** 2


# eigenvalues (s_1, s_2) of the four basis states, ordered 00, 01, 10, 11
SPIN_SIGNS = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)


def initial_state_from_z_label(label: str) -> QubitPairState:
    """Express the computational-basis state ``|label>_z`` in the x basis.

    >>> initial_state_from_z_label("11").amplitudes
    ((0.5+0j), (-0.5+0j), (-0.5+0j), (0.5+0j))
    """
    if label not in ("00", "01", "10", "11"):
        raise ValueError(f"invalid two-qubit z label {label!r}")
    # |0>_z = (|0>_x + |1>_x)/sqrt2, |1>_z = (|0>_x - |1>_x)/sqrt2
    single = {"0": np.array([1.0, 1.0]), "1": np.array([1.0, -1.0])}
    amps = np.kron(single[label[0]], single[label[1]]) / 2
    return QubitPairState(tuple(amps))


@dataclass(frozen=True)
class PolynomialNoise:
    """Slow drift ``beta(t) = sum_j coefficients[j] * t**j``."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        coeffs = tuple(complex(c) if isinstance(c, complex) else float(c)
                       for c in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if not coeffs:
            raise ValueError("polynomial needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coefficients)


SPECTRUM_FAMILIES = ("white", "one_over_f", "power_law", "tabulated")


@dataclass(frozen=True)
class SpectrumNoise:
    r"""Stationary two-sided power spectral density of Rabi-rate noise.

    The convention is ``E[x(t1) x(t2)] = (1/2pi) \int S(w) exp(iw(t1-t2)) dw``
    and ``S`` is even in ``w``. Families, with ``A = amplitude`` in
    (rad/s)^2 per rad/s:

    white
        ``S = A`` for ``|w| <= high_cutoff`` (and ``>= low_cutoff``).
    one_over_f
        ``S = A * low_cutoff / |w|`` on ``[low_cutoff, high_cutoff]``.
    power_law
        ``S = A * (|w| / low_cutoff)**exponent`` on the same band; a zero
        ``low_cutoff`` uses a 1 rad/s reference instead.
    tabulated
        linear interpolation of ``(table_omega, table_psd)`` in ``|w|``,
        scaled by ``A``, zero outside the table.
    """

    family: str
    amplitude: float
    high_cutoff: float = math.inf
    low_cutoff: float = 0.0
    exponent: float = 0.0
    table_omega: tuple[float, ...] = ()
    table_psd: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in SPECTRUM_FAMILIES:
            raise ValueError(f"unknown PSD family {self.family!r}")
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0):
            raise ValueError("PSD amplitude must be >= 0")
        object.__setattr__(self, "table_omega", tuple(float(w) for w in self.table_omega))
        object.__setattr__(self, "table_psd", tuple(float(s) for s in self.table_psd))
        if self.family == "tabulated":
            w = np.asarray(self.table_omega)
            s = np.asarray(self.table_psd)
            if w.size < 2 or w.shape != s.shape:
                raise ValueError("tabulated PSD needs matching omega/psd arrays of length >= 2")
            if np.any(np.diff(w) <= 0) or w[0] < 0:
                raise ValueError("tabulated omega must be non-negative and strictly increasing")
            if np.any(s < 0):
                raise ValueError("PSD must be non-negative")
            object.__setattr__(self, "low_cutoff", float(w[0]))
            object.__setattr__(self, "high_cutoff", float(w[-1]))
        if not (self.low_cutoff >= 0 and self.high_cutoff > self.low_cutoff):
            raise ValueError("PSD cutoffs must satisfy 0 <= low < high")
        if self.family == "one_over_f" and self.low_cutoff <= 0:
            raise ValueError("one_over_f needs a positive low cutoff")
        if self.family == "power_law" and self.exponent < 0 and self.low_cutoff <= 0:
            raise ValueError("a negative power-law exponent needs a positive low cutoff")

    def psd(self, omega) -> np.ndarray:
        w = np.abs(np.asarray(omega, dtype=float))
        band = (w >= self.low_cutoff) & (w <= self.high_cutoff)
        out = np.zeros_like(w)
        if self.family == "white":
            out[band] = self.amplitude
        elif self.family == "one_over_f":
            out[band] = self.amplitude * self.low_cutoff / w[band]
        elif self.family == "power_law":
            ref = self.low_cutoff if self.low_cutoff > 0 else 1.0
            out[band] = self.amplitude * (w[band] / ref) ** self.exponent
        else:
            out[band] = self.amplitude * np.interp(w[band], self.table_omega, self.table_psd)
        return out

    def scaled(self, factor: float) -> "SpectrumNoise":
        return SpectrumNoise(self.family, self.amplitude * factor, self.high_cutoff,
                             self.low_cutoff, self.exponent, self.table_omega, self.table_psd)

    @property
    def band(self) -> tuple[float, float]:
        return self.low_cutoff, self.high_cutoff


def mode_by_index(modes: Sequence[ModeSpec], index: int) -> ModeSpec:
    for m in modes:
        if m.index == index:
            return m
    raise KeyError(f"unknown mode index {index}")


def check_mode_table(modes: Sequence[ModeSpec]) -> None:
    if not modes:
        raise ValueError("empty mode table")
    idx = [m.index for m in modes]
    if len(set(idx)) != len(idx):
        raise ValueError("mode indices must be unique")


# ---------------------------------------------------------------------------
# Config ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Config:
    modes: tuple[ModeSpec, ...]
    drive: DriveSpec
    sequence: PhaseSequence | None = None
    recipe: ConcatRecipe | None = None
    noise: PolynomialNoise | SpectrumNoise | None = None
    state: QubitPairState | None = None
    # free-form per-command settings (filter grid, purity, calibrate, ...)
    analysis: Mapping[str, Any] = field(default_factory=dict)

    @property
    def step(self) -> float:
        if self.sequence is not None:
            return self.sequence.step
        if self.recipe is not None:
            return self.recipe.step
        raise ConfigError("config has neither 'sequence' nor 'recipe'", "sequence")


def _quantity(section: Mapping, base: str, units: dict, path: str,
              required: bool = True, default=None):
    """Read ``base_<unit>`` from ``section`` and convert to canonical units."""
    hits = [k for k in section if k == base or k.startswith(base + "_")]
    if not hits:
        if required:
            raise ConfigError(f"missing required field '{base}_<unit>'", path)
        return default
    if len(hits) > 1:
        raise ConfigError(f"field given more than once: {sorted(hits)}", path)
    key = hits[0]
    unit = key[len(base) + 1:]
    if unit not in units:
        raise ConfigError(f"unknown unit '{unit}' (allowed: {', '.join(units)})", f"{path}.{key}")
    try:
        value = float(section[key])
    except (TypeError, ValueError):
        raise ConfigError("expected a number", f"{path}.{key}") from None
    return value * units[unit]


def _check_keys(section: Mapping, allowed_bases: Sequence[str], path: str) -> None:
    for key in section:
        if not any(key == b or key.startswith(b + "_") for b in allowed_bases):
            raise ConfigError(f"unknown field '{key}'", path)


def _require_mapping(obj, path: str) -> Mapping:
    if not isinstance(obj, Mapping):
        raise ConfigError("expected a mapping", path)
    return obj


def _parse_modes(raw, path="modes") -> tuple[ModeSpec, ...]:
    if raw is None or (isinstance(raw, list) and not raw):
        raise ConfigError("empty mode table", path)
    if not isinstance(raw, list):
        raise ConfigError("expected a list of modes", path)
    modes = []
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        item = _require_mapping(item, p)
        _check_keys(item, ("index", "detuning", "mode_frequency", "mean_occupation", "couplings"), p)
        couplings = item.get("couplings", [])
        if not isinstance(couplings, list):
            raise ConfigError("couplings must be a list", p + ".couplings")
        try:
            modes.append(ModeSpec(
                index=int(item.get("index", i + 1)),
                detuning=_quantity(item, "detuning", FREQUENCY_UNITS, p),
                mode_frequency=_quantity(item, "mode_frequency", FREQUENCY_UNITS, p),
                mean_occupation=float(item.get("mean_occupation", 0.0)),
                couplings=tuple(float(c) for c in couplings),
            ))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), p) from None
    try:
        check_mode_table(modes)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None
    return tuple(modes)


def _parse_step(section: Mapping, modes, path) -> float:
    if "tau_s_period_of_mode" in section:
        k = int(section["tau_s_period_of_mode"])
        try:
            delta = mode_by_index(modes, k).detuning
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), path + ".tau_s_period_of_mode") from None
        if delta == 0:
            raise ConfigError("mode has zero detuning; no period", path + ".tau_s_period_of_mode")
        return TWO_PI / abs(delta)
    sub = {k: v for k, v in section.items() if k.startswith("tau_s_")}
    return _quantity(sub, "tau_s", TIME_UNITS, path)


def _parse_drive(raw, path="drive") -> DriveSpec:
    raw = _require_mapping(raw, path)
    _check_keys(raw, ("rabi_rate", "driven_qubits", "spin_axis"), path)
    try:
        return DriveSpec(
            rabi_rate=_quantity(raw, "rabi_rate", FREQUENCY_UNITS, path, required=False, default=0.0),
            driven_qubits=tuple(raw.get("driven_qubits", (1, 2))),
            spin_axis=str(raw.get("spin_axis", "x")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), path) from None


def _parse_sequence(raw, modes, path="sequence") -> PhaseSequence:
    raw = _require_mapping(raw, path)
    _check_keys(raw, ("tau_s", "phases"), path)
    step = _parse_step(raw, modes, path)
    if "phases_rad" in raw:
        phases = np.asarray(raw["phases_rad"], dtype=float)
    elif "phases_pi" in raw:
        phases = np.pi * np.asarray(raw["phases_pi"], dtype=float)
    else:
        raise ConfigError("missing 'phases_rad' or 'phases_pi'", path)
    try:
        return PhaseSequence(step, tuple(phases))
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def _parse_recipe(raw, modes, path="recipe") -> ConcatRecipe:
    raw = _require_mapping(raw, path)
    _check_keys(raw, ("tau_s", "modes", "full"), path)
    step = _parse_step(raw, modes, path)
    if raw.get("full", False):
        indices = tuple(m.index for m in modes)
    else:
        indices = tuple(int(k) for k in raw.get("modes", []))
    known = {m.index for m in modes}
    for i, k in enumerate(indices):
        if k not in known:
            raise ConfigError(f"unknown mode index {k}", f"{path}.modes[{i}]")
    return ConcatRecipe(indices, step)


def _parse_noise(raw, path="noise"):
    raw = _require_mapping(raw, path)
    kind = raw.get("type")
    if kind == "polynomial":
        _check_keys(raw, ("type", "coefficients"), path)
        coeffs = raw.get("coefficients")
        if not isinstance(coeffs, list) or not coeffs:
            raise ConfigError("polynomial noise needs a non-empty coefficient list", path + ".coefficients")
        return PolynomialNoise(tuple(float(c) for c in coeffs))
    if kind not in SPECTRUM_FAMILIES:
        raise ConfigError(f"unknown noise type {kind!r}", path + ".type")
    _check_keys(raw, ("type", "amplitude", "exponent", "low_cutoff", "high_cutoff",
                      "table_omega", "table_psd"), path)
    # amplitude is a PSD in (rad/s)^2 / (rad/s); keys: amplitude_rad2_s or amplitude
    amp_units = {"rad2_s": 1.0}
    if "amplitude" in raw:
        amplitude = float(raw["amplitude"])
    else:
        amplitude = _quantity(raw, "amplitude", amp_units, path)
    kw: dict[str, Any] = dict(family=kind, amplitude=amplitude)
    kw["low_cutoff"] = _quantity(raw, "low_cutoff", FREQUENCY_UNITS, path, required=False, default=0.0)
    kw["high_cutoff"] = _quantity(raw, "high_cutoff", FREQUENCY_UNITS, path,
                                  required=kind != "tabulated", default=math.inf)
    kw["exponent"] = float(raw.get("exponent", -1.0 if kind == "one_over_f" else 0.0))
    if kind == "tabulated":
        tab_w = {k: v for k, v in raw.items() if k.startswith("table_omega")}
        if len(tab_w) != 1:
            raise ConfigError("tabulated PSD needs exactly one table_omega_<unit>", path)
        key, vals = next(iter(tab_w.items()))
        unit = key[len("table_omega_"):]
        if unit not in FREQUENCY_UNITS:
            raise ConfigError(f"unknown unit '{unit}'", f"{path}.{key}")
        kw["table_omega"] = tuple(float(v) * FREQUENCY_UNITS[unit] for v in vals)
        kw["table_psd"] = tuple(float(v) for v in raw.get("table_psd", []))
        kw.pop("low_cutoff")
        kw.pop("high_cutoff")
    try:
        return SpectrumNoise(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from None


def _parse_state(raw, path="state") -> QubitPairState:
    raw = _require_mapping(raw, path)
    _check_keys(raw, ("z_label", "amplitudes"), path)
    try:
        if "z_label" in raw:
            return initial_state_from_z_label(str(raw["z_label"]))
        amps = raw.get("amplitudes")
        if not isinstance(amps, list) or len(amps) != 4:
            raise ConfigError("expected four amplitudes", path + ".amplitudes")
        vals = []
        for a in amps:
            if isinstance(a, (list, tuple)):
                vals.append(complex(float(a[0]), float(a[1])))
            else:
                vals.append(complex(float(a)))
        return QubitPairState(tuple(vals))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), path) from None


ANALYSIS_SECTIONS = ("filter", "purity", "calibrate", "trace", "fock")
TOP_LEVEL = ("modes", "drive", "sequence", "recipe", "noise", "state") + ANALYSIS_SECTIONS


def load_config(text: str | Mapping) -> Config:
    """Parse and validate a YAML/JSON config document.

    Raises
    ------
    ConfigError
        On schema or invariant violations and unknown units; the message
        carries the field path.
    """
    if isinstance(text, Mapping):
        doc = text
    else:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed document: {exc}") from None
    if doc is None:
        doc = {}
    doc = _require_mapping(doc, "<root>")
    for key in doc:
        if key not in TOP_LEVEL:
            raise ConfigError(f"unknown section '{key}'", key)

    modes = _parse_modes(doc.get("modes"))
    drive = _parse_drive(doc.get("drive", {}))
    n_qubits = max(drive.driven_qubits)
    for i, m in enumerate(modes):
        if len(m.couplings) < n_qubits:
            raise ConfigError(f"needs couplings for {n_qubits} qubits", f"modes[{i}].couplings")
    if "sequence" in doc and "recipe" in doc:
        raise ConfigError("give either 'sequence' or 'recipe', not both", "<root>")
    sequence = _parse_sequence(doc["sequence"], modes) if "sequence" in doc else None
    recipe = _parse_recipe(doc["recipe"], modes) if "recipe" in doc else None
    noise = _parse_noise(doc["noise"]) if "noise" in doc else None
    state = _parse_state(doc["state"]) if "state" in doc else None
    analysis = {k: dict(_require_mapping(doc[k], k)) for k in ANALYSIS_SECTIONS if k in doc}
    return Config(modes, drive, sequence, recipe, noise, state, analysis)


def load_config_file(path) -> Config:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())


def dump_config(cfg: Config) -> dict:
    """Serialize to a document in canonical units (rad/s, s).

    ``load_config(dump_config(cfg))`` reproduces every numeric field.
    """
    doc: dict[str, Any] = {
        "modes": [
            {
                "index": m.index,
                "detuning_rad_s": m.detuning,
                "mode_frequency_rad_s": m.mode_frequency,
                "mean_occupation": m.mean_occupation,
                "couplings": list(m.couplings),
            }
            for m in cfg.modes
        ],
        "drive": {
            "rabi_rate_rad_s": cfg.drive.rabi_rate,
            "driven_qubits": list(cfg.drive.driven_qubits),
            "spin_axis": cfg.drive.spin_axis,
        },
    }
    if cfg.sequence is not None:
        doc["sequence"] = {"tau_s_s": cfg.sequence.step, "phases_rad": list(cfg.sequence.phases)}
    if cfg.recipe is not None:
        doc["recipe"] = {"tau_s_s": cfg.recipe.step, "modes": list(cfg.recipe.mode_indices)}
    n = cfg.noise
    if isinstance(n, PolynomialNoise):
        doc["noise"] = {"type": "polynomial", "coefficients": [float(c) for c in n.coefficients]}
    elif isinstance(n, SpectrumNoise):
        nd: dict[str, Any] = {"type": n.family, "amplitude": n.amplitude, "exponent": n.exponent}
        if n.family == "tabulated":
            nd["table_omega_rad_s"] = list(n.table_omega)
            nd["table_psd"] = list(n.table_psd)
        else:
            nd["low_cutoff_rad_s"] = n.low_cutoff
            nd["high_cutoff_rad_s"] = n.high_cutoff
        doc["noise"] = nd
    if cfg.state is not None:
        doc["state"] = {"amplitudes": [[a.real, a.imag] for a in cfg.state.amplitudes]}
    for k, v in cfg.analysis.items():
        doc[k] = dict(v)
    return doc
