"""KCBS pentagon and odd n-cycle exclusivity scenarios in C^3."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidN, LengthMismatch, NotExclusive, OutOfRange
from .hilbert import (
    ATOL_COMPOSITE,
    StateVector,
    born_probability,
    rank1_projector,
    trace_overlap,
)
from .scenarios import PARADOX_GUARD

MAX_N = 15


def _check_n(n):
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidN(f"n must be an integer, got {n!r}")
    if n < 5 or n % 2 == 0:
        raise InvalidN(f"n must be odd and >= 5, got {n}")


@dataclass(frozen=True)
class CycleGraph:
    """Odd cycle C_n; vertex i is exclusive with i - 1 and i + 1 (mod n)."""

    n: int

    def __post_init__(self):
        _check_n(self.n)

    @property
    def edges(self):
        return [(i, (i + 1) % self.n) for i in range(self.n)]


@dataclass(frozen=True, eq=False)
class CycleInstance:
    graph: CycleGraph
    projectors: tuple
    # Unnormalized generating vectors, kept for serialization.
    vectors: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "projectors", tuple(self.projectors))
        if len(self.projectors) != self.graph.n:
            raise LengthMismatch("need one projector per cycle vertex")
        for i, j in self.graph.edges:
            ov = trace_overlap(self.projectors[i], self.projectors[j])
            if abs(ov) > ATOL_COMPOSITE:
                raise NotExclusive(
                    f"projectors {i} and {j} are not orthogonal (tr = {ov:.3g})")

    @property
    def n(self) -> int:
        return self.graph.n

    def gram(self) -> np.ndarray:
        """|<v_i|v_j>|^2 = tr(P_i P_j); invariant under global unitaries."""
        return np.array([[trace_overlap(p, q) for q in self.projectors]
                         for p in self.projectors])


def kcbs_vectors() -> np.ndarray:
    """The five unnormalized pentagon vectors (rows), in cyclic order."""
    h = math.sqrt(math.cos(math.pi / 5))
    c2, s2 = math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5)
    c4, s4 = math.cos(4 * math.pi / 5), math.sin(4 * math.pi / 5)
    return np.array([
        [1.0, 0.0, h],
        [c4, -s4, h],
        [c2, s2, h],
        [c2, -s2, h],
        [c4, s4, h],
    ])


def _instance(raw: np.ndarray) -> CycleInstance:
    projectors = tuple(rank1_projector(StateVector(v)) for v in raw)
    return CycleInstance(CycleGraph(len(raw)), projectors, tuple(map(tuple, raw)))


def kcbs_projectors() -> CycleInstance:
    return _instance(kcbs_vectors())


def ncycle_vectors(n: int) -> np.ndarray:
    """Symmetric-cone vectors: azimuth steps of pi(n-1)/n, common height."""
    _check_n(n)
    if n > MAX_N:
        raise InvalidN(f"n must be <= {MAX_N}, got {n}")
    angles = np.arange(n) * math.pi * (n - 1) / n
    h = math.sqrt(math.cos(math.pi / n))
    return np.column_stack([np.cos(angles), np.sin(angles), np.full(n, h)])


def ncycle_projectors(n: int) -> CycleInstance:
    return _instance(ncycle_vectors(n))


def cycle_instance(n: int) -> CycleInstance:
    """The pentagon for n = 5, the symmetric cone otherwise."""
    return kcbs_projectors() if n == 5 else ncycle_projectors(n)


def k_value(zetas: Sequence[float]) -> float:
    z = np.asarray(zetas, dtype=float)
    if z.ndim != 1 or not np.all(np.isfinite(z)):
        raise OutOfRange("zetas must be a flat sequence of finite reals")
    if np.any(z < -ATOL_COMPOSITE) or np.any(z > 1 + ATOL_COMPOSITE):
        raise OutOfRange("every zeta must lie in [0, 1]")
    return float(z.sum())


def edge_sums(zetas, g: CycleGraph) -> np.ndarray:
    z = np.asarray(zetas, dtype=float)
    if z.shape[-1] != g.n:
        raise LengthMismatch(f"expected {g.n} values, got {z.shape[-1]}")
    return z + np.roll(z, -1, axis=-1)


def exclusivity_ok(zetas, g: CycleGraph):
    """(all edge sums <= 1, edge sums) with edge i joining vertices i and i+1."""
    sums = edge_sums(zetas, g)
    return bool(np.all(sums <= 1 + PARADOX_GUARD)), sums


def noncontextual_bound(n: int) -> int:
    _check_n(n)
    return n // 2


def born_k(pre: StateVector, inst: CycleInstance) -> float:
    return k_value([born_probability(p, pre) for p in inst.projectors])


def quantum_k(n: int) -> float:
    """Closed form n cos(pi/n) / (1 + cos(pi/n)) for the symmetric state."""
    _check_n(n)
    c = math.cos(math.pi / n)
    return n * c / (1 + c)
