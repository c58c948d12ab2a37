"""Counterfactual PPS scenarios, logical paradoxes and sector labels."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .abl import TwoState, abl_dichotomic, abl_probabilities
from .errors import NotExclusive, UndefinedConditioning
from .hilbert import (
    ATOL_COMPOSITE,
    PVM,
    Projector,
    StateVector,
    basis_state,
    rank1_projector,
    trace_overlap,
)

# Sums up to 1 + PARADOX_GUARD count as respecting exclusivity.
PARADOX_GUARD = 1e-12


@dataclass(frozen=True, eq=False)
class DichotomicSetting:
    """The measurement {pi, 1 - pi}; ``pi`` is the outcome being assigned."""

    pi: Projector

    @property
    def dim(self) -> int:
        return self.pi.dim

    @property
    def pvm(self) -> PVM:
        return PVM.dichotomic(self.pi)

    @classmethod
    def from_vector(cls, v) -> "DichotomicSetting":
        return cls(rank1_projector(v if isinstance(v, StateVector) else StateVector(v)))


@dataclass(frozen=True, eq=False)
class CounterfactualScenario:
    two_state: TwoState
    setting: PVM

    @property
    def defined(self) -> bool:
        try:
            abl_probabilities(self.two_state, self.setting)
        except UndefinedConditioning:
            return False
        return True

    def probabilities(self):
        return abl_probabilities(self.two_state, self.setting)


@dataclass(frozen=True, eq=False)
class ParadoxWitness:
    two_state: TwoState
    pi1: Projector
    pi2: Projector
    zeta1: float
    zeta2: float

    @property
    def total(self) -> float:
        return self.zeta1 + self.zeta2


class SectorLabel(enum.Enum):
    PARADOXICAL = "Paradoxical"
    NON_PARADOXICAL = "NonParadoxical"
    UNDEFINED = "Undefined"

    def __str__(self):
        return self.value


def require_exclusive(pi1: Projector, pi2: Projector) -> None:
    if abs(trace_overlap(pi1, pi2)) > ATOL_COMPOSITE:
        raise NotExclusive(f"tr(P1 P2) = {trace_overlap(pi1, pi2):.3g} != 0")


def check_logical_paradox(ts: TwoState, pi1: Projector,
                          pi2: Projector) -> Optional[ParadoxWitness]:
    """Witness if the two exclusive outcomes get ABL probabilities summing past 1."""
    require_exclusive(pi1, pi2)
    z1 = abl_dichotomic(ts, pi1)
    z2 = abl_dichotomic(ts, pi2)
    if z1 + z2 > 1 + PARADOX_GUARD:
        return ParadoxWitness(ts, pi1, pi2, z1, z2)
    return None


def classify_sector(ts: TwoState, pairs: Iterable) -> SectorLabel:
    pairs = list(pairs)
    # Validate every pair before evaluating any, so malformed input always raises.
    for pi1, pi2 in pairs:
        require_exclusive(pi1, pi2)
    undefined = False
    for pi1, pi2 in pairs:
        try:
            if check_logical_paradox(ts, pi1, pi2) is not None:
                return SectorLabel.PARADOXICAL
        except UndefinedConditioning:
            undefined = True
    return SectorLabel.UNDEFINED if undefined else SectorLabel.NON_PARADOXICAL


def exclusive_pairs(projectors, atol: float = ATOL_COMPOSITE):
    """All index pairs (i, j), i < j, of mutually orthogonal projectors."""
    out = []
    for i in range(len(projectors)):
        for j in range(i + 1, len(projectors)):
            if abs(trace_overlap(projectors[i], projectors[j])) <= atol:
                out.append((i, j))
    return out


def three_box_scenario():
    """The three-box paradox: boxes A, B, C are the computational basis of C^3."""
    pre = StateVector(np.array([1, 1, 1]) / np.sqrt(3))
    post = StateVector(np.array([1, 1, -1]) / np.sqrt(3))
    settings = (DichotomicSetting(rank1_projector(basis_state(3, 0))),
                DichotomicSetting(rank1_projector(basis_state(3, 1))))
    return TwoState(pre, post), settings

