"""Finite-dimensional Hilbert-space primitives.

States and projectors are thin immutable wrappers around dense numpy arrays.
Dimensions in this package never exceed ~10, so everything is dense and
complex128.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidProjector,
    InvalidPVM,
    ValidationError,
    ZeroVector,
)

# Tolerances shared by the library and its tests.
ATOL_CONSTRUCT = 1e-12
ATOL_COMPOSITE = 1e-10
ZERO_NORM = 1e-15


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Unit-norm pure state. Non-unit input is rescaled on construction."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1:
            raise ValidationError(f"state must be 1-d, got shape {v.shape}")
        if v.size < 2:
            raise ValidationError("state dimension must be at least 2")
        if not np.all(np.isfinite(v)):
            raise ValidationError("state has non-finite amplitudes")
        norm = np.linalg.norm(v)
        if norm < ZERO_NORM:
            raise ZeroVector("cannot normalize a zero vector")
        object.__setattr__(self, "amplitudes", _frozen(v / norm))

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"StateVector({np.array2string(self.amplitudes, precision=6)})"


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidProjector(f"projector must be square, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidProjector("projector has non-finite entries")
        if not np.allclose(m, m.conj().T, rtol=0, atol=ATOL_CONSTRUCT):
            raise InvalidProjector("matrix is not Hermitian")
        if not np.allclose(m @ m, m, rtol=0, atol=ATOL_CONSTRUCT):
            raise InvalidProjector("matrix is not idempotent")
        tr = np.trace(m).real
        if abs(tr - round(tr)) > ATOL_COMPOSITE:
            raise InvalidProjector(f"trace {tr} is not an integer")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class PVM:
    """Complete set of mutually orthogonal projectors."""

    elements: tuple

    def __post_init__(self):
        elements = tuple(self.elements)
        if not elements:
            raise InvalidPVM("PVM needs at least one element")
        dim = elements[0].dim
        if any(p.dim != dim for p in elements):
            raise DimensionMismatch("PVM elements differ in dimension")
        for i, a in enumerate(elements):
            for b in elements[i + 1:]:
                if not np.allclose(a.matrix @ b.matrix, 0, atol=ATOL_COMPOSITE):
                    raise InvalidPVM("PVM elements are not pairwise orthogonal")
        total = sum(p.matrix for p in elements)
        if not np.allclose(total, np.eye(dim), atol=ATOL_COMPOSITE):
            raise InvalidPVM("PVM elements do not sum to the identity")
        object.__setattr__(self, "elements", elements)

    @classmethod
    def dichotomic(cls, p: Projector) -> "PVM":
        """The two-outcome measurement {p, 1 - p}."""
        return cls((p, complement(p)))

    @classmethod
    def basis(cls, dim: int) -> "PVM":
        return cls(tuple(rank1_projector(basis_state(dim, k)) for k in range(dim)))

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def normalize(v: Sequence[complex]) -> StateVector:
    return StateVector(np.asarray(v, dtype=np.complex128))


def basis_state(dim: int, k: int) -> StateVector:
    v = np.zeros(dim, dtype=np.complex128)
    v[k] = 1.0
    return StateVector(v)


def _check_dims(*objs):
    dims = {o.dim for o in objs}
    if len(dims) != 1:
        raise DimensionMismatch(f"dimension mismatch: {sorted(dims)}")


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in the first argument."""
    _check_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def rank1_projector(v: StateVector) -> Projector:
    if not isinstance(v, StateVector):
        v = StateVector(v)
    return Projector(np.outer(v.amplitudes, v.amplitudes.conj()))


def identity(dim: int) -> Projector:
    return Projector(np.eye(dim))


def complement(p: Projector) -> Projector:
    return Projector(np.eye(p.dim) - p.matrix)


def born_probability(p: Projector, s: StateVector) -> float:
    _check_dims(p, s)
    val = np.vdot(s.amplitudes, p.matrix @ s.amplitudes)
    return float(min(max(val.real, 0.0), 1.0))


def collapse(p: Projector, s: StateVector) -> StateVector:
    """Post-measurement state for outcome ``p`` (Lüders rule)."""
    _check_dims(p, s)
    if born_probability(p, s) < ZERO_NORM:
        raise ZeroVector("outcome has zero probability; no post-measurement state")
    return StateVector(p.matrix @ s.amplitudes)


def trace_overlap(p: Projector, q: Projector) -> float:
    """tr(p q); zero exactly when p and q are orthogonal."""
    _check_dims(p, q)
    return float(np.trace(p.matrix @ q.matrix).real)
