"""Phase-compensated concatenation of piecewise-constant phase sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .model import ConcatRecipe, ModeSpec, PhaseSequence, mode_by_index

__all__ = [
    "BinaryIndex",
    "base_sequence",
    "apply_R",
    "synth_full",
    "binary_phases",
    "synth_recipe",
    "reduce_commensurate",
]


@dataclass(frozen=True)
class BinaryIndex:
    """Bit decomposition of a segment index ``l``."""

    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("segment index must be >= 0")

    @property
    def bits(self) -> tuple[int, ...]:
        """``eps_j(l)`` for ``j = 0 .. q``, least significant first."""
        if self.value == 0:
            return (0,)
        return tuple((self.value >> j) & 1 for j in range(self.value.bit_length()))

    @property
    def hamming_weight(self) -> int:
        return bin(self.value).count("1")


def base_sequence(step: float) -> PhaseSequence:
    """Single zero-phase segment, the no-operation sequence ``r0``."""
    return PhaseSequence(step, (0.0,))


def apply_R(seq: PhaseSequence, delta: float) -> PhaseSequence:
    """Append a copy of ``seq`` shifted in phase by ``delta*T - pi``.

    ``T`` is the duration of ``seq``. The result closes the phase-space
    trajectory at detuning ``delta`` regardless of the input.
    """
    shift = delta * seq.duration - math.pi
    phases = seq.phase_array
    return PhaseSequence(seq.step, tuple(np.concatenate([phases, phases + shift])))


def binary_phases(detunings: Sequence[float], step: float) -> np.ndarray:
    """Closed-form phases of the full ``2**M``-segment sequence.

    ``phi_l = sum_j eps_j(l) 2**j delta_{j+1} step - s(l) pi``.
    """
    detunings = np.asarray(detunings, dtype=float)
    m = detunings.size
    ell = np.arange(2 ** m)
    bits = (ell[:, None] >> np.arange(m)[None, :]) & 1
    weights = (2.0 ** np.arange(m)) * detunings * step
    return bits @ weights - bits.sum(axis=1) * math.pi


def synth_full(modes: Sequence[ModeSpec], step: float) -> PhaseSequence:
    """Sequence decoupling every mode in ``modes`` (in table order).

    Built by folding ``apply_R`` so the result is bit-identical to the
    equivalent recipe; ``binary_phases`` gives the same phases in closed
    form.
    """
    if len(modes) < 1:
        raise ValueError("empty mode table")
    return reduce(apply_R, [m.detuning for m in modes], base_sequence(step))


def synth_recipe(recipe: ConcatRecipe, modes: Sequence[ModeSpec]) -> PhaseSequence:
    """Left-fold ``apply_R`` over the recipe, first index innermost."""
    deltas = [mode_by_index(modes, k).detuning for k in recipe.mode_indices]
    return reduce(apply_R, deltas, base_sequence(recipe.step))


def reduce_commensurate(modes: Sequence[ModeSpec], step: float,
                        tol: float = 1e-9) -> tuple[list[int], list[int]]:
    """Split modes into those a single step already closes and the rest.

    A mode is closed by one step when ``delta*step/2pi`` lies within
    ``tol`` of a nonzero integer. Returns ``(auto_closed, needs_R)`` as
    lists of mode indices.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    closed, open_ = [], []
    for m in modes:
        turns = m.detuning * step / (2 * math.pi)
        nearest = round(turns)
        if nearest != 0 and abs(turns - nearest) <= tol:
            closed.append(m.index)
        else:
            open_.append(m.index)
    return closed, open_
