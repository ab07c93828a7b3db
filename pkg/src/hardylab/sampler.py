"""Finite-shot Monte Carlo stand-in for the proposed measurement runs.

Outcomes are drawn from the exact joint distribution of one commuting
context.  Randomness is counter-based and fully positional: shot ``k``
consumes the k-th 64-bit word of the Philox-4x64 stream keyed by the run
seed (lane ``k % 4`` of counter block ``k // 4``).  Sampling any shot
range therefore merges bit-for-bit with any partition of that range, so
results are reproducible and independent of scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    HardyLabError,
    ObservableOp,
    StateVector,
    commutator_norm,
    NonCommutingError,
    tolerance,
)
from .observables import joint_outcome_table

#: Outcome cells in draw order.
CELL_ORDER = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class RunConfig:
    """One measurement run: a commuting context, a shot count, a seed."""

    first: ObservableOp
    second: ObservableOp
    shots: int
    seed: int

    def __post_init__(self) -> None:
        if self.shots < 0:
            raise HardyLabError(f"shots must be nonnegative, got {self.shots}")
        if not 0 <= self.seed < 2**64:
            raise HardyLabError("seed must fit in 64 unsigned bits")
        if commutator_norm(self.first, self.second) > tolerance():
            raise NonCommutingError(
                f"context ({self.first.name}, {self.second.name}) does not commute"
            )


@dataclass(frozen=True)
class CountTable:
    counts: np.ndarray  # [a][b] nonnegative ints
    shots: int

    def __post_init__(self) -> None:
        counts = np.array(self.counts, dtype=np.int64).reshape(2, 2)
        if (counts < 0).any() or int(counts.sum()) != self.shots:
            raise HardyLabError("counts must be nonnegative and sum to shots")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def to_jsonable(self) -> dict:
        return {"shots": self.shots, "counts": self.counts.tolist()}


def _shot_uniforms(seed: int, start: int, count: int) -> np.ndarray:
    """Uniforms for shots [start, start+count) under the substream rule."""
    if count == 0:
        return np.zeros(0)
    first_block, offset = divmod(start, 4)
    n_blocks = -(-(offset + count) // 4)
    bitgen = np.random.Philox(key=seed, counter=[first_block, 0, 0, 0])
    words = np.random.Generator(bitgen).integers(
        0, 2**64, size=4 * n_blocks, dtype=np.uint64, endpoint=False
    )
    return (words[offset : offset + count] >> np.uint64(11)) * 2.0**-53


def exact_context_probabilities(
    state: StateVector, cfg: RunConfig, tol: float | None = None
) -> np.ndarray:
    """The 2x2 distribution the run samples from, zero cells clamped exact."""
    return joint_outcome_table(cfg.first, cfg.second, state, tol)


def sample(
    state: StateVector, cfg: RunConfig, first_shot: int = 0, tol: float | None = None
) -> CountTable:
    """Draw ``cfg.shots`` outcomes of the context from the exact distribution.

    ``first_shot`` selects the substream position, letting disjoint shot
    ranges of one logical run be sampled separately and merged; identical
    ``(state, cfg)`` always reproduces identical counts bit-for-bit.
    Cells of exact probability zero can never accumulate counts.
    """
    probs = exact_context_probabilities(state, cfg, tol)
    flat = np.array([probs[a][b] for a, b in CELL_ORDER])
    flat = flat / flat.sum()
    boundaries = np.cumsum(flat)
    boundaries[-1] = 1.0  # guard against float shortfall at the top end

    u = _shot_uniforms(cfg.seed, first_shot, cfg.shots)
    outcomes = np.searchsorted(boundaries, u, side="right")
    counts = np.bincount(outcomes, minlength=4).reshape(2, 2)
    return CountTable(counts, cfg.shots)


@dataclass(frozen=True)
class CellDeviation:
    outcome: tuple[int, int]
    count: int
    frequency: float
    exact: float
    deviation: float
    std_error: float
    z_score: float | None  # None when the exact probability is 0 or 1

    def to_jsonable(self) -> dict:
        return {
            "outcome": list(self.outcome),
            "count": self.count,
            "frequency": self.frequency,
            "exact": self.exact,
            "deviation": self.deviation,
            "std_error": self.std_error,
            "z_score": self.z_score,
        }


@dataclass(frozen=True)
class DeviationReport:
    cells: tuple[CellDeviation, ...]
    max_abs_z: float
    impossible_violations: tuple[tuple[int, int], ...]

    def to_jsonable(self) -> dict:
        return {
            "cells": [c.to_jsonable() for c in self.cells],
            "max_abs_z": self.max_abs_z,
            "impossible_violations": [list(v) for v in self.impossible_violations],
        }


def compare_frequencies(counts: CountTable, exact: np.ndarray) -> DeviationReport:
    """Per-cell deviation, binomial standard error, and z-scores.

    A nonzero count in a cell whose exact probability is zero is flagged
    as an impossible-event violation rather than given an infinite z.
    """
    if counts.shots <= 0:
        raise HardyLabError("compare_frequencies requires a positive shot count")
    exact = np.asarray(exact, dtype=float).reshape(2, 2)
    n = counts.shots
    cells = []
    violations = []
    max_z = 0.0
    for a, b in CELL_ORDER:
        c = int(counts.counts[a][b])
        p = float(exact[a][b])
        freq = c / n
        dev = freq - p
        se = math.sqrt(p * (1.0 - p) / n)
        if se > 0:
            z = dev / se
            max_z = max(max_z, abs(z))
        else:
            z = None
            if c != (0 if p == 0.0 else n):
                violations.append((a, b))
        cells.append(CellDeviation((a, b), c, freq, p, dev, se, z))
    return DeviationReport(tuple(cells), max_z, tuple(violations))
