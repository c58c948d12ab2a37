"""Sequential-measurement simulation of a pre/post-selected ensemble.

Each trial starts in the pre-selected state, measures the intermediate PVM
(Born rule + Lüders collapse), then passes the post-selection filter
{|phi><phi|, 1 - |phi><phi|} with probability |<phi|collapsed>|^2. The
accepted-trial frequencies estimate the ABL probabilities.

Randomness: trials are grouped in fixed blocks of ``BLOCK`` trials. Block ``b``
draws from PCG64 seeded with ``SeedSequence(seed, spawn_key=(b,))``; each trial
consumes two uniforms (outcome, acceptance). Counts therefore depend only on
(seed, trial index), never on how blocks are spread over workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .abl import TwoState, abl_probabilities
from .errors import DimensionMismatch, NoAcceptedTrials, ValidationError
from .hilbert import PVM, ZERO_NORM, StateVector, born_probability, collapse

BLOCK = 1 << 16
SIGMA_THRESHOLD = 4.0
# absorbs round-off when the standard error is exactly zero (f in {0, 1})
FLAG_ATOL = 1e-12
MAX_BLOCKS = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    samples: int
    seed: int = 0
    min_accepted: int = 0

    def __post_init__(self):
        if self.samples < 1:
            raise ValidationError("samples must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimEstimate:
    counts: tuple
    accepted_total: int
    attempted: int
    frequencies: tuple
    std_errors: tuple

    @property
    def acceptance_rate(self) -> float:
        return self.accepted_total / self.attempted


def _branches(pre: StateVector, m: PVM, post: StateVector):
    """Per-outcome Born probability and post-selection pass probability."""
    born = np.array([born_probability(p, pre) for p in m])
    passes = np.zeros(len(m))
    for j, p in enumerate(m):
        if born[j] >= ZERO_NORM:
            after = collapse(p, pre)
            passes[j] = abs(np.vdot(post.amplitudes, after.amplitudes)) ** 2
    return born, passes


def _block(seed, b, n, cum, passes):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(b,))))
    u = rng.random((n, 2))
    outcome = np.minimum(np.searchsorted(cum, u[:, 0], side="right"), len(cum) - 1)
    accepted = u[:, 1] < passes[outcome]
    return np.bincount(outcome[accepted], minlength=len(cum))


def simulate_pps(pre: StateVector, m: PVM, post: StateVector, cfg: SimConfig,
                 workers: Optional[int] = 1) -> SimEstimate:
    """Run ``cfg.samples`` trials (more, in whole blocks, until ``min_accepted``)."""
    if not (pre.dim == post.dim == m.dim):
        raise DimensionMismatch("states and PVM differ in dimension")
    born, passes = _branches(pre, m, post)
    cum = np.cumsum(born / born.sum())

    def run(blocks):
        if workers and workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(
                    lambda bn: _block(cfg.seed, bn[0], bn[1], cum, passes), blocks))
        return [_block(cfg.seed, b, n, cum, passes) for b, n in blocks]

    n_blocks = -(-cfg.samples // BLOCK)
    blocks = [(b, min(BLOCK, cfg.samples - b * BLOCK)) for b in range(n_blocks)]
    counts = np.sum(run(blocks), axis=0)
    attempted = cfg.samples
    # top up in whole blocks, appended after the requested samples
    next_block = n_blocks
    while counts.sum() < cfg.min_accepted:
        if next_block >= MAX_BLOCKS:
            raise NoAcceptedTrials(
                f"only {counts.sum()} of {cfg.min_accepted} trials accepted")
        counts = counts + _block(cfg.seed, next_block, BLOCK, cum, passes)
        attempted += BLOCK
        next_block += 1

    total = int(counts.sum())
    if total == 0:
        raise NoAcceptedTrials("no trial passed the post-selection")
    freqs = counts / total
    se = np.sqrt(freqs * (1 - freqs) / total)
    return SimEstimate(tuple(int(c) for c in counts), total, attempted,
                       tuple(float(f) for f in freqs), tuple(float(s) for s in se))


def expected_acceptance(pre: StateVector, m: PVM, post: StateVector) -> float:
    """Sum over outcomes of Born weight times post-selection pass probability."""
    born, passes = _branches(pre, m, post)
    return float(np.dot(born, passes))


@dataclass(frozen=True)
class OutcomeCheck:
    outcome: int
    zeta: float
    freq: float
    se: float
    sigma_distance: float
    flag: bool

    def as_dict(self):
        return {"outcome": self.outcome, "zeta": self.zeta, "freq": self.freq,
                "se": self.se, "sigma_distance": self.sigma_distance,
                "flag": self.flag}


def verify_abl(pre: StateVector, m: PVM, post: StateVector, cfg: SimConfig,
               workers: Optional[int] = 1) -> list:
    """Pair simulated frequencies with ABL predictions, flagging > 4 SE misses."""
    dist = abl_probabilities(TwoState(pre, post), m)
    est = simulate_pps(pre, m, post, cfg, workers)
    report = []
    for j, (z, f, se) in enumerate(zip(dist.zetas, est.frequencies, est.std_errors)):
        delta = abs(f - z)
        dist_sigma = delta / se if se > 0 else (0.0 if delta <= FLAG_ATOL else math.inf)
        flag = delta > SIGMA_THRESHOLD * se + FLAG_ATOL
        report.append(OutcomeCheck(j, z, f, se, dist_sigma, flag))
    return report
