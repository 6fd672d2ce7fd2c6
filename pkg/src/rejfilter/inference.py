"""Rejection filter update: sample the Gaussian prior, accept by rescaled
likelihood, and refit a Gaussian to the accepted samples."""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidLikelihoodError
from .gaussian import GaussianModel, covariance_factor
from .moments import MomentAccumulator, finalize

# Candidates are drawn in blocks of this many so working memory does not grow with m.
CHUNK = 4096


class LikelihoodModel:
    """Evidence-conditional likelihood ``P(E|x)`` with a per-evidence scale.

    Subclasses implement :meth:`likelihood`, vectorised over the leading axis
    of ``xs``. :meth:`kappa` defaults to 1.
    """

    def likelihood(self, evidence, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def kappa(self, evidence) -> float:
        return 1.0


class FunctionLikelihood(LikelihoodModel):
    """Wrap a plain ``fn(evidence, xs) -> array`` as a :class:`LikelihoodModel`.

    ``kappa`` may be a constant or a callable of the evidence.
    """

    def __init__(self, fn, kappa=1.0):
        self.fn = fn
        self._kappa = kappa

    def likelihood(self, evidence, xs):
        return self.fn(evidence, xs)

    def kappa(self, evidence):
        return self._kappa(evidence) if callable(self._kappa) else self._kappa


@dataclass(frozen=True)
class RFConfig:
    attempts: int
    recovery_factor: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if int(self.attempts) != self.attempts or self.attempts < 1:
            raise ValueError("attempts must be a positive integer")
        if not self.recovery_factor >= 0:
            raise ValueError("recovery_factor must be >= 0")


@dataclass(frozen=True)
class ApproxRejectionDiagnostics:
    """Per-update acceptance statistics.

    ``clipped_fraction`` is the share of drawn candidates for which some
    evidence had ``P(E|x)/kappa > 1``, i.e. candidates in the bad set.
    """

    acceptance_rate: float
    clipped_fraction: float
    bad_mass_bound: Optional[float] = None


class RFResult(NamedTuple):
    model: GaussianModel
    n_accepted: int
    diagnostics: ApproxRejectionDiagnostics


def acceptance_ratio(xs, evidence_list: Sequence, likelihood: LikelihoodModel):
    """Return ``prod_E min(P(E|x)/kappa_E, 1)`` for each row of ``xs``
    together with a mask of rows where some ratio exceeded 1."""
    n = len(xs)
    ratio = np.ones(n)
    clipped = np.zeros(n, dtype=bool)
    for evidence in evidence_list:
        kappa = float(likelihood.kappa(evidence))
        if not (kappa > 0 and np.isfinite(kappa)):
            raise InvalidLikelihoodError(f"kappa must be positive and finite, got {kappa}")
        values = np.asarray(likelihood.likelihood(evidence, xs), dtype=float)
        if values.shape != (n,):
            values = np.broadcast_to(values, (n,))
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidLikelihoodError("likelihood returned a negative or non-finite value")
        scaled = values / kappa
        clipped |= scaled > 1
        ratio *= np.minimum(scaled, 1.0)
    return ratio, clipped


def accept_sample(x, evidence_list: Sequence, likelihood: LikelihoodModel, u: float) -> bool:
    """Single-candidate acceptance test against a uniform draw ``u``."""
    if not 0 <= u < 1:
        raise ValueError("u must lie in [0, 1)")
    ratio, _ = acceptance_ratio(np.atleast_1d(np.asarray(x, dtype=float))[None, :], evidence_list, likelihood)
    return bool(ratio[0] >= u)


def rejection_step(candidates, evidence_list, likelihood, rng):
    """Accept each candidate independently; returns ``(mask, clipped_mask)``.

    One uniform is drawn per candidate, after the candidates themselves.
    Works for any candidate array, including finite hypothesis sets.
    """
    ratio, clipped = acceptance_ratio(candidates, evidence_list, likelihood)
    u = rng.random(len(ratio))
    return ratio >= u, clipped


def run_attempts(acc: MomentAccumulator, prior: GaussianModel, evidence_list, likelihood,
                 attempts: int, rng: np.random.Generator) -> int:
    """Push accepted candidates from ``attempts`` prior draws into ``acc``.

    Returns the number of drawn candidates that fell in the bad set.
    """
    if acc.dim != prior.dim:
        raise DimensionMismatchError(
            f"prior dimension {prior.dim} does not match accumulator dimension {acc.dim}"
        )
    factor = covariance_factor(prior.covariance)
    n_clipped = 0
    remaining = int(attempts)
    while remaining > 0:
        block = min(remaining, CHUNK)
        xs = prior.mean + rng.standard_normal((block, prior.dim)) @ factor.T
        mask, clipped = rejection_step(xs, evidence_list, likelihood, rng)
        acc.extend(xs[mask])
        n_clipped += int(clipped.sum())
        remaining -= block
    return n_clipped


def rf_update(evidence_list, prior: GaussianModel, likelihood: LikelihoodModel,
              config: RFConfig, rng: Optional[np.random.Generator] = None) -> RFResult:
    """One rejection-filter update over an array of evidence.

    Exactly ``config.attempts`` candidates are drawn from ``prior``. The
    returned model is the moment fit of the accepted samples, or the prior
    with covariance inflated by ``1 + recovery_factor`` when fewer than two
    were accepted (see :func:`rejfilter.moments.finalize`).
    """
    if rng is None:
        rng = np.random.default_rng(config.rng_seed)
    acc = MomentAccumulator(prior.dim)
    n_clipped = run_attempts(acc, prior, evidence_list, likelihood, config.attempts, rng)
    posterior = finalize(acc, prior, config.recovery_factor)
    diag = ApproxRejectionDiagnostics(
        acceptance_rate=acc.count / config.attempts,
        clipped_fraction=n_clipped / config.attempts,
    )
    return RFResult(posterior, acc.count, diag)


# Exact quantities on finite hypothesis sets, used to check the sampler.

def _enumerated(prior_probs, likelihood_values, kappa):
    p = np.asarray(prior_probs, dtype=float)
    lik = np.asarray(likelihood_values, dtype=float)
    if p.shape != lik.shape:
        raise DimensionMismatchError("prior and likelihood tables differ in shape")
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    return p / p.sum(), lik


def total_likelihood(prior_probs, likelihood_values) -> float:
    """``P(E) = sum_x P(E|x) P(x)``."""
    p, lik = _enumerated(prior_probs, likelihood_values, 1.0)
    return float(np.dot(p, lik))


def acceptance_probability(prior_probs, likelihood_values, kappa: float) -> float:
    """Exact per-attempt acceptance probability ``sum_x min(P(E|x)/kappa, 1) P(x)``."""
    p, lik = _enumerated(prior_probs, likelihood_values, kappa)
    return float(np.dot(p, np.minimum(lik / kappa, 1.0)))


def clipped_posterior(prior_probs, likelihood_values, kappa: float) -> np.ndarray:
    """Distribution actually sampled by approximate rejection sampling."""
    p, lik = _enumerated(prior_probs, likelihood_values, kappa)
    w = p * np.minimum(lik / kappa, 1.0)
    return w / w.sum()


def bad_mass_bound(prior_probs, likelihood_values, kappa: float) -> float:
    """Smallest ``delta`` with ``sum_bad (P(E|x) - kappa) P(x) <= delta P(E)``.

    The bad set is every hypothesis whose likelihood exceeds ``kappa``;
    ``delta = 0`` means the rescaled likelihood is a valid probability
    everywhere and sampling is exact.
    """
    p, lik = _enumerated(prior_probs, likelihood_values, kappa)
    excess = np.clip(lik - kappa, 0.0, None)
    return float(np.dot(excess, p) / np.dot(lik, p))
