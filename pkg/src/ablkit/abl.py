"""ABL retrodiction rule for pre- and post-selected ensembles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConsistencyError, DimensionMismatch, UndefinedConditioning
from .hilbert import ATOL_COMPOSITE, PVM, ZERO_NORM, Projector, StateVector


@dataclass(frozen=True, eq=False)
class TwoState:
    """Ordered pair (pre-selection |psi>, post-selection |phi>)."""

    pre: StateVector
    post: StateVector

    def __post_init__(self):
        if not isinstance(self.pre, StateVector):
            object.__setattr__(self, "pre", StateVector(self.pre))
        if not isinstance(self.post, StateVector):
            object.__setattr__(self, "post", StateVector(self.post))
        if self.pre.dim != self.post.dim:
            raise DimensionMismatch("pre- and post-selection differ in dimension")

    @property
    def dim(self) -> int:
        return self.pre.dim

    def swapped(self) -> "TwoState":
        return TwoState(self.post, self.pre)


@dataclass(frozen=True, eq=False)
class AblDistribution:
    setting: PVM
    zetas: tuple

    def __getitem__(self, i):
        return self.zetas[i]

    def __len__(self):
        return len(self.zetas)


def transition_amplitude(ts: TwoState, p: Projector) -> complex:
    """<phi| p |psi>."""
    if p.dim != ts.dim:
        raise DimensionMismatch("projector and two-state differ in dimension")
    return complex(np.vdot(ts.post.amplitudes, p.matrix @ ts.pre.amplitudes))


def _clamp(z: float) -> float:
    if z < -ATOL_COMPOSITE or z > 1 + ATOL_COMPOSITE:
        raise ConsistencyError(f"ABL probability {z!r} outside [0, 1]")
    return min(max(z, 0.0), 1.0)


def _weights(ts, projectors):
    return np.array([abs(transition_amplitude(ts, p)) ** 2 for p in projectors])


def abl_probabilities(ts: TwoState, m: PVM) -> AblDistribution:
    """zeta_i = |<phi|P_i|psi>|^2 / sum_j |<phi|P_j|psi>|^2 over the PVM ``m``."""
    w = _weights(ts, m.elements)
    total = w.sum()
    if total < ZERO_NORM:
        raise UndefinedConditioning(
            "post-selection has zero probability for every outcome")
    zetas = tuple(_clamp(float(x)) for x in w / total)
    return AblDistribution(m, zetas)


def abl_dichotomic(ts: TwoState, p: Projector) -> float:
    """ABL probability of ``p`` within the setting {p, 1 - p}.

    Avoids constructing the complement projector:
    <phi|(1-p)|psi> = <phi|psi> - <phi|p|psi>.
    """
    a = transition_amplitude(ts, p)
    b = complex(np.vdot(ts.post.amplitudes, ts.pre.amplitudes)) - a
    wa, wb = abs(a) ** 2, abs(b) ** 2
    if wa + wb < ZERO_NORM:
        raise UndefinedConditioning(
            "post-selection has zero probability for both outcomes")
    return _clamp(wa / (wa + wb))


def counterfactual_assignment(ts: TwoState, settings: Sequence) -> list[float]:
    """One zeta per dichotomic setting, each conditioned on its own context.

    ``settings`` holds :class:`~ablkit.scenarios.DichotomicSetting` objects or
    bare projectors. No joint distribution over the settings is implied.
    """
    out = []
    for i, s in enumerate(settings):
        p = getattr(s, "pi", s)
        try:
            out.append(abl_dichotomic(ts, p))
        except UndefinedConditioning as exc:
            raise UndefinedConditioning(f"setting {i}: {exc}", index=i) from exc
    return out
