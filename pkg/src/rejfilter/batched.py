"""Attempt-sharded rejection filter update.

The ``m`` attempts of one update are split across ``N_batch`` nodes. Each
node runs the inner accept loop on its own random stream and ships back
raw sums ``(N_a^i, M^i, S^i)`` over its accepted samples; the coordinator
adds them up and finalizes once. Nodes never round-trip through a
finalized ``(mu^i, Sigma^i)``.
"""

import json
import struct
from dataclasses import dataclass
from functools import partial
from typing import List, Sequence

import numpy as np

from .errors import DimensionMismatchError
from .gaussian import GaussianModel
from .inference import run_attempts
from .moments import WIDE, MomentAccumulator, finalize
from .parallel import pmap


@dataclass(frozen=True, eq=False)
class PartialUpdate:
    partial_sum: np.ndarray
    partial_outer: np.ndarray
    accepted: int
    node_id: int = 0
    seed_used: int = 0

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.partial_sum, dtype=float))
        s = np.asarray(self.partial_outer, dtype=float).reshape(m.size, m.size)
        if self.accepted < 0:
            raise ValueError("accepted count must be >= 0")
        if self.accepted == 0 and (np.any(m) or np.any(s)):
            raise ValueError("a partial with no accepted samples must carry zero sums")
        object.__setattr__(self, "partial_sum", m)
        object.__setattr__(self, "partial_outer", s)

    @property
    def dim(self) -> int:
        return self.partial_sum.shape[0]

    def __eq__(self, other):
        if not isinstance(other, PartialUpdate):
            return NotImplemented
        return (
            self.accepted == other.accepted
            and self.node_id == other.node_id
            and self.seed_used == other.seed_used
            and np.array_equal(self.partial_sum, other.partial_sum)
            and np.array_equal(self.partial_outer, other.partial_outer)
        )

    # Wire forms. Record layout, little-endian:
    #   int64 node_id | int64 N_a | float64[D] M | float64[D*D] S (row-major) | uint64 seed

    def to_bytes(self) -> bytes:
        d = self.dim
        return struct.pack(
            f"<qq{d}d{d * d}dQ",
            self.node_id,
            self.accepted,
            *self.partial_sum.tolist(),
            *self.partial_outer.ravel().tolist(),
            self.seed_used,
        )

    @classmethod
    def from_bytes(cls, buf: bytes) -> "PartialUpdate":
        n_doubles, rem = divmod(len(buf) - 24, 8)
        d = int(round((-1 + (1 + 4 * n_doubles) ** 0.5) / 2)) if n_doubles > 0 else 0
        if rem or d < 1 or d + d * d != n_doubles:
            raise ValueError(f"buffer of {len(buf)} bytes is not a partial-update record")
        fields = struct.unpack(f"<qq{d}d{d * d}dQ", buf)
        return cls(
            partial_sum=np.array(fields[2 : 2 + d]),
            partial_outer=np.array(fields[2 + d : 2 + d + d * d]).reshape(d, d),
            accepted=fields[1],
            node_id=fields[0],
            seed_used=fields[-1],
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "node_id": self.node_id,
                "n_accepted": self.accepted,
                "M": self.partial_sum.tolist(),
                "S": self.partial_outer.ravel().tolist(),
                "seed": self.seed_used,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PartialUpdate":
        rec = json.loads(text)
        m = np.asarray(rec["M"], dtype=float)
        return cls(
            partial_sum=m,
            partial_outer=np.asarray(rec["S"], dtype=float).reshape(m.size, m.size),
            accepted=int(rec["n_accepted"]),
            node_id=int(rec["node_id"]),
            seed_used=int(rec["seed"]),
        )


def split_attempts(attempts: int, n_batch: int) -> List[int]:
    """Even split; the first ``attempts % n_batch`` nodes get one extra."""
    if n_batch < 1:
        raise ValueError("n_batch must be >= 1")
    q, rem = divmod(int(attempts), n_batch)
    return [q + (1 if i < rem else 0) for i in range(n_batch)]


def node_seeds(master_seed: int, n_batch: int) -> List[int]:
    """One independent 64-bit seed per node, derived from ``(master_seed, node_id)``."""
    children = np.random.SeedSequence(master_seed).spawn(n_batch)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _partial_from(acc: MomentAccumulator, node_id: int, seed: int) -> PartialUpdate:
    if acc.count == 0:
        return PartialUpdate(np.zeros(acc.dim), np.zeros((acc.dim, acc.dim)), 0, node_id, seed)
    return PartialUpdate(
        acc.sum.astype(float), acc.sum_outer.astype(float), acc.count, node_id, seed
    )


def node_update(evidence_list, prior: GaussianModel, likelihood, attempts: int,
                node_seed: int, node_id: int = 0) -> PartialUpdate:
    """Run ``attempts`` accept trials on the node's own stream; return raw sums."""
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    acc = MomentAccumulator(prior.dim)
    run_attempts(acc, prior, evidence_list, likelihood, attempts, np.random.default_rng(node_seed))
    return _partial_from(acc, node_id, node_seed)


def combine(partials: Sequence[PartialUpdate], fallback: GaussianModel, r: float = 0.0):
    """Pool node sums into ``(GaussianModel, total N_a)``.

    Partials are summed in ``node_id`` order in extended precision, so the
    result does not depend on arrival order. Fewer than two accepted samples
    in total falls back the same way as a single-node update.
    """
    if r < 0:
        raise ValueError("recovery factor must be >= 0")
    d = fallback.dim
    for p in partials:
        if p.dim != d:
            raise DimensionMismatchError(f"partial dimension {p.dim} does not match model dimension {d}")
    total = 0
    m_sum = np.zeros(d, dtype=WIDE)
    s_sum = np.zeros((d, d), dtype=WIDE)
    for p in sorted(partials, key=lambda p: (p.node_id, p.seed_used)):
        total += p.accepted
        m_sum += p.partial_sum.astype(WIDE)
        s_sum += p.partial_outer.astype(WIDE)
    if total == 0:
        return GaussianModel(fallback.mean, (1.0 + r) * fallback.covariance), 0
    mu = m_sum / total
    if total == 1:
        return GaussianModel(mu.astype(float), (1.0 + r) * fallback.covariance), 1
    cov = (s_sum - total * np.outer(mu, mu)) / (total - 1)
    cov = 0.5 * (cov + cov.T)
    return GaussianModel(mu.astype(float), cov.astype(float)), total


def _run_node(job, evidence_list, prior, likelihood):
    node_id, attempts, seed = job
    return node_update(evidence_list, prior, likelihood, attempts, seed, node_id)


def batched_update(evidence_list, prior: GaussianModel, likelihood, attempts: int,
                   n_batch: int, master_seed: int, r: float = 0.0, workers=None):
    """Shard one update over ``n_batch`` nodes and combine.

    Returns ``(model, total N_a, partials)``. Deterministic for a fixed
    ``(master_seed, n_batch)`` whatever the worker count. A single node has
    nothing to pool, so its accumulator is finalized directly.
    """
    if n_batch == 1:
        seed = node_seeds(master_seed, 1)[0]
        acc = MomentAccumulator(prior.dim)
        run_attempts(acc, prior, evidence_list, likelihood, attempts, np.random.default_rng(seed))
        return finalize(acc, prior, r), acc.count, [_partial_from(acc, 0, seed)]
    jobs = [
        (i, m_i, seed)
        for i, (m_i, seed) in enumerate(zip(split_attempts(attempts, n_batch), node_seeds(master_seed, n_batch)))
        if m_i > 0
    ]
    run = partial(_run_node, evidence_list=evidence_list, prior=prior, likelihood=likelihood)
    partials = pmap(run, jobs, processes=False, workers=workers)
    model, n_a = combine(partials, prior, r)
    return model, n_a, partials


def single_node_replay(evidence_list, prior: GaussianModel, likelihood, attempts: int,
                       n_batch: int, master_seed: int, r: float = 0.0):
    """Single-node reference for :func:`batched_update`.

    One accumulator consumes all ``attempts`` candidates, taken from the
    node streams one after another, so it sees exactly the accepted-sample
    multiset the batched run sees. It is finalized through the Welford path,
    independently of the raw-sum arithmetic in :func:`combine`.
    """
    acc = MomentAccumulator(prior.dim)
    for m_i, seed in zip(split_attempts(attempts, n_batch), node_seeds(master_seed, n_batch)):
        if m_i > 0:
            run_attempts(acc, prior, evidence_list, likelihood, m_i, np.random.default_rng(seed))
    return finalize(acc, prior, r), acc.count
