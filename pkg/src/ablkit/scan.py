"""Grid scans of the ABL-assigned K functional over post-selected states.

Post-selections are parametrized on the real unit sphere,
``(cos t, sin t cos p, sin t sin p)``, optionally decorated with relative
phases on the last two amplitudes. Every grid cell is independent; scans are
chunked over theta rows and merged by cell index, so the result does not
depend on the number of workers.
"""
from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .abl import TwoState
from .cycles import CycleInstance, noncontextual_bound
from .errors import EmptyFeasibleSet, ValidationError
from .hilbert import ZERO_NORM, Projector, StateVector
from .scenarios import PARADOX_GUARD, ParadoxWitness, require_exclusive

WORKERS_ENV = "ABLKIT_WORKERS"
MIN_STEP = 1e-7


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


@dataclass(frozen=True)
class SphereGrid:
    """theta in [0, pi] with both endpoints; phi in [0, 2 pi) periodic.

    ``phase_steps > 1`` adds relative phases alpha, beta in [0, 2 pi) on the
    second and third amplitudes.
    """

    theta_steps: int = 512
    phi_steps: int = 1024
    phase_steps: int = 1

    def __post_init__(self):
        if self.theta_steps < 2:
            raise ValidationError("theta_steps must be >= 2")
        if self.phi_steps < 4:
            raise ValidationError("phi_steps must be >= 4")
        if self.phase_steps < 1:
            raise ValidationError("phase_steps must be >= 1")

    @property
    def thetas(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.theta_steps)

    @property
    def phis(self) -> np.ndarray:
        return np.arange(self.phi_steps) * (2 * math.pi / self.phi_steps)

    @property
    def phases(self) -> np.ndarray:
        return np.arange(self.phase_steps) * (2 * math.pi / self.phase_steps)

    @property
    def theta_spacing(self) -> float:
        return math.pi / (self.theta_steps - 1)

    @property
    def phi_spacing(self) -> float:
        return 2 * math.pi / self.phi_steps

    def __len__(self):
        return self.theta_steps * self.phi_steps * self.phase_steps ** 2


def post_state(theta, phi, alpha=0.0, beta=0.0) -> np.ndarray:
    """Sphere point(s) as complex amplitude array(s), last axis of length 3."""
    theta, phi, alpha, beta = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (theta, phi, alpha, beta)))
    st = np.sin(theta)
    return np.stack([
        np.cos(theta).astype(np.complex128),
        np.exp(1j * alpha) * st * np.cos(phi),
        np.exp(1j * beta) * st * np.sin(phi),
    ], axis=-1)


def evaluate_posts(pre: StateVector, projectors: Sequence[Projector],
                   posts: np.ndarray):
    """Dichotomic ABL values for a batch of post-selections.

    Returns ``(zetas, defined)`` with shapes ``(N, len(projectors))`` and
    ``(N,)``. Rows whose conditioning fails in any setting are NaN.
    """
    posts = np.asarray(posts, dtype=np.complex128)
    psi = pre.amplitudes
    conj = posts.conj()
    d = psi.shape[0]

    def bra(vec):
        # explicit component sum: bit-identical regardless of batch size
        acc = conj[:, 0] * vec[0]
        for k in range(1, d):
            acc = acc + conj[:, k] * vec[k]
        return acc

    zetas = np.empty((posts.shape[0], len(projectors)))
    ok = np.ones(posts.shape[0], dtype=bool)
    overlap = bra(psi)
    for i, p in enumerate(projectors):
        a = bra(p.matrix @ psi)
        b = overlap - a
        wa = a.real ** 2 + a.imag ** 2
        wb = b.real ** 2 + b.imag ** 2
        den = wa + wb
        good = den >= ZERO_NORM
        ok &= good
        with np.errstate(invalid="ignore", divide="ignore"):
            zetas[:, i] = np.clip(wa / den, 0.0, 1.0)
    zetas[~ok] = np.nan
    return zetas, ok


@dataclass(frozen=True)
class ScanCell:
    theta: float
    phi: float
    zetas: tuple
    k: float
    exclusive: bool
    defined: bool
    alpha: float = 0.0
    beta: float = 0.0


@dataclass(eq=False)
class ScanResult:
    """Columnar scan output; ``cell(i)`` materializes one row-major record."""

    grid: SphereGrid
    instance: CycleInstance
    pre: StateVector
    theta: np.ndarray
    phi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    zetas: np.ndarray
    k: np.ndarray
    exclusive: np.ndarray
    defined: np.ndarray

    def __len__(self):
        return self.k.shape[0]

    def cell(self, i: int) -> ScanCell:
        return ScanCell(float(self.theta[i]), float(self.phi[i]),
                        tuple(float(z) for z in self.zetas[i]), float(self.k[i]),
                        bool(self.exclusive[i]), bool(self.defined[i]),
                        float(self.alpha[i]), float(self.beta[i]))

    def __iter__(self):
        return (self.cell(i) for i in range(len(self)))

    @property
    def cells(self):
        return list(self)

    @property
    def feasible(self) -> np.ndarray:
        return self.defined & self.exclusive

    @property
    def has_phases(self) -> bool:
        return self.grid.phase_steps > 1


def _grid_chunk(pre, inst, grid, rows):
    T = grid.thetas[rows]
    P, A = grid.phis, grid.phases
    th, ph, al, be = np.meshgrid(T, P, A, A, indexing="ij")
    th, ph, al, be = (x.ravel() for x in (th, ph, al, be))
    zetas, ok = evaluate_posts(pre, inst.projectors, post_state(th, ph, al, be))
    return th, ph, al, be, zetas, ok


def _row_chunks(n_rows, workers):
    # fixed small chunks keep memory bounded; chunking never changes values
    size = max(1, min(64, -(-n_rows // workers)))
    return [np.arange(s, min(s + size, n_rows)) for s in range(0, n_rows, size)]


def _run_chunks(fn, chunks, workers):
    if workers == 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def scan_postselection(pre: StateVector, inst: CycleInstance,
                       grid: SphereGrid = SphereGrid(),
                       workers: Optional[int] = 1) -> ScanResult:
    if pre.dim != 3:
        raise ValidationError("scans are defined for d = 3 pre-selections")
    workers = resolve_workers(workers)
    parts = _run_chunks(lambda rows: _grid_chunk(pre, inst, grid, rows),
                        _row_chunks(grid.theta_steps, workers), workers)
    th, ph, al, be, zetas, ok = (np.concatenate(x) for x in zip(*parts))
    k = np.where(ok, np.nansum(zetas, axis=1), np.nan)
    sums = zetas + np.roll(zetas, -1, axis=1)
    with np.errstate(invalid="ignore"):
        exclusive = ok & np.all(sums <= 1 + PARADOX_GUARD, axis=1)
    return ScanResult(grid, inst, pre, th, ph, al, be, zetas, k, exclusive, ok)


def region_mask(scan: ScanResult, k_min: float) -> np.ndarray:
    with np.errstate(invalid="ignore"):
        return scan.feasible & (scan.k > k_min)


def region_above(scan: ScanResult, k_min: float):
    """Feasible cells with K > k_min as (theta, phi) pairs, row-major."""
    idx = np.flatnonzero(region_mask(scan, k_min))
    return [(float(scan.theta[i]), float(scan.phi[i])) for i in idx]


@dataclass(frozen=True)
class MaxResult:
    k_star: float
    theta_star: float
    phi_star: float
    zetas: tuple
    grid_k: float
    alpha_star: float = 0.0
    beta_star: float = 0.0
    seeds: int = 1

    def __iter__(self):
        # unpacks as (k_star, theta_star, phi_star)
        return iter((self.k_star, self.theta_star, self.phi_star))


def _probe(pre, inst, theta, phi, alpha, beta):
    zetas, ok = evaluate_posts(pre, inst.projectors,
                               post_state(theta, phi, alpha, beta)[None, :])
    if not ok[0]:
        return None
    z = zetas[0]
    if np.any(z + np.roll(z, -1) > 1 + PARADOX_GUARD):
        return None
    return float(z.sum()), z


def _refine(scan, i, refine_steps):
    pre, inst = scan.pre, scan.instance
    al, be = float(scan.alpha[i]), float(scan.beta[i])
    th, ph = float(scan.theta[i]), float(scan.phi[i])
    best = _probe(pre, inst, th, ph, al, be)
    if best is None:  # grid feasibility sits on the guard band edge
        return float(scan.k[i]), th, ph, scan.zetas[i]
    k, z = best
    step_t, step_p = scan.grid.theta_spacing, scan.grid.phi_spacing
    halvings = 0
    while halvings < refine_steps and max(step_t, step_p) >= MIN_STEP:
        improved = False
        for axis in (0, 1):
            for sign in (1.0, -1.0):
                if axis == 0:
                    t, p = th + sign * step_t, ph
                    if not 0.0 <= t <= math.pi:
                        continue
                else:
                    t, p = th, (ph + sign * step_p) % (2 * math.pi)
                res = _probe(pre, inst, t, p, al, be)
                if res is not None and res[0] > k:
                    k, z = res
                    th, ph = t, p
                    improved = True
        if not improved:
            step_t /= 2
            step_p /= 2
            halvings += 1
    return k, th, ph, z


def constrained_max(scan: ScanResult, refine_steps: int = 40,
                    seeds: int = 8) -> MaxResult:
    """Best feasible cell, then derivative-free coordinate descent.

    The top ``seeds`` feasible cells are refined independently; every probe is
    re-checked for definedness and exclusivity and rejected if it fails.
    """
    feasible = np.flatnonzero(scan.feasible)
    if feasible.size == 0:
        raise EmptyFeasibleSet("no defined cell satisfies exclusivity")
    order = feasible[np.argsort(-scan.k[feasible], kind="stable")]
    grid_k = float(scan.k[order[0]])
    candidates = order[:max(1, seeds)] if refine_steps > 0 else order[:1]
    best = None
    for i in candidates:
        if refine_steps > 0:
            k, th, ph, z = _refine(scan, i, refine_steps)
        else:
            k, th, ph, z = (float(scan.k[i]), float(scan.theta[i]),
                            float(scan.phi[i]), scan.zetas[i])
        if best is None or k > best[0]:
            best = (k, th, ph, tuple(float(x) for x in z),
                    float(scan.alpha[i]), float(scan.beta[i]))
    k, th, ph, z, al, be = best
    return MaxResult(k, th, ph, z, grid_k, al, be, len(candidates))


@dataclass(frozen=True, eq=False)
class GridWitness(ParadoxWitness):
    theta: float = field(default=0.0)
    phi: float = field(default=0.0)


def paradox_search(pre: StateVector, pi1: Projector, pi2: Projector,
                   grid: SphereGrid = SphereGrid(256, 512),
                   workers: Optional[int] = 1) -> list:
    """All grid post-selections giving a logical paradox for (pi1, pi2)."""
    require_exclusive(pi1, pi2)
    workers = resolve_workers(workers)

    def run(rows):
        th, ph = np.meshgrid(grid.thetas[rows], grid.phis, indexing="ij")
        th, ph = th.ravel(), ph.ravel()
        zetas, ok = evaluate_posts(pre, (pi1, pi2), post_state(th, ph))
        with np.errstate(invalid="ignore"):
            hit = ok & (zetas[:, 0] + zetas[:, 1] > 1 + PARADOX_GUARD)
        return th[hit], ph[hit], zetas[hit]

    parts = _run_chunks(run, _row_chunks(grid.theta_steps, workers), workers)
    out = []
    for th, ph, zetas in parts:
        for t, p, (z1, z2) in zip(th, ph, zetas):
            ts = TwoState(pre, StateVector(post_state(t, p)))
            out.append(GridWitness(ts, pi1, pi2, float(z1), float(z2),
                                   float(t), float(p)))
    return out


@dataclass(frozen=True)
class PreScanRow:
    pre_theta: float
    pre_phi: float
    k_grid: float
    theta: float
    phi: float


def scan_preselections(inst: CycleInstance, pre_grid: SphereGrid,
                       grid: SphereGrid, workers: Optional[int] = 1) -> list:
    """Coarse outer scan over pre-selections; best feasible grid K for each."""
    rows = []
    for pt in pre_grid.thetas:
        for pp in pre_grid.phis:
            pre = StateVector(post_state(pt, pp))
            scan = scan_postselection(pre, inst, grid, workers)
            feasible = np.flatnonzero(scan.feasible)
            if feasible.size == 0:
                rows.append(PreScanRow(float(pt), float(pp), math.nan,
                                       math.nan, math.nan))
                continue
            i = feasible[np.argmax(scan.k[feasible])]
            rows.append(PreScanRow(float(pt), float(pp), float(scan.k[i]),
                                   float(scan.theta[i]), float(scan.phi[i])))
    return rows


class ConjectureWarning(UserWarning):
    """An exclusivity-respecting post-selection beat the noncontextual bound."""


def check_conjecture(result: MaxResult, n: int,
                     witness_path: Optional[Path] = None,
                     atol: float = 1e-9) -> bool:
    """True if k_star respects floor(n/2); otherwise warn and persist a witness."""
    bound = noncontextual_bound(n)
    if result.k_star <= bound + atol:
        return True
    msg = (f"n={n}: exclusivity-respecting K = {result.k_star:.9g} exceeds "
           f"noncontextual bound {bound}")
    if witness_path is not None:
        witness_path = Path(witness_path)
        witness_path.parent.mkdir(parents=True, exist_ok=True)
        witness_path.write_text(json.dumps(witness_record(result, n), indent=2) + "\n")
        msg += f" (witness written to {witness_path})"
    warnings.warn(msg, ConjectureWarning, stacklevel=2)
    return False


def witness_record(result: MaxResult, n: int) -> dict:
    from .serialize import fmt
    z = result.zetas
    return {
        "n": n,
        "noncontextual_bound": noncontextual_bound(n),
        "k": fmt(result.k_star),
        "theta": fmt(result.theta_star),
        "phi": fmt(result.phi_star),
        "alpha": fmt(result.alpha_star),
        "beta": fmt(result.beta_star),
        "zetas": [fmt(x) for x in z],
        "edge_sums": [fmt(z[i] + z[(i + 1) % len(z)]) for i in range(len(z))],
    }
