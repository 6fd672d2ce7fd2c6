"""Tracking a drifting oscillator frequency with the rejection filter.

Each measurement has outcome ``E`` in {0, 1} with

    P(E=1 | x; x_-, t) = cos^2((x - x_-) t / 2)

where ``x_-`` (inversion point) and ``t`` (evolution time) are chosen by
the particle guess heuristic. The true frequency takes a Gaussian random
walk step after every measurement, and the filter diffuses its belief by
the matching variance before each design.
"""

import math
from dataclasses import astuple, dataclass, fields
from functools import partial
from typing import List, Sequence

import numpy as np

from .diffusion import DiffusionKernel, diffuse
from .errors import DegenerateModelError
from .gaussian import GaussianModel, sample_prior
from .inference import LikelihoodModel, RFConfig, rf_update
from .parallel import pmap

STEP_SIGMA = math.pi / 120
WALK_VARIANCE = STEP_SIGMA ** 2
TRUTH_LOW, TRUTH_HIGH = 0.0, math.pi / 2


def freq_likelihood(outcome: int, x, x_minus: float, t: float):
    """``cos^2((x - x_-) t / 2)`` for outcome 1, its complement for outcome 0."""
    p1 = np.cos((np.asarray(x, dtype=float) - x_minus) * t / 2) ** 2
    return p1 if outcome == 1 else 1.0 - p1


class FreqLikelihood(LikelihoodModel):
    def __init__(self, x_minus: float, t: float, kappa: float = 1.0):
        if not t > 0:
            raise ValueError("evolution time must be > 0")
        self.x_minus = float(x_minus)
        self.t = float(t)
        self._kappa = float(kappa)

    def likelihood(self, evidence, xs):
        return freq_likelihood(evidence, np.asarray(xs)[:, 0], self.x_minus, self.t)

    def kappa(self, evidence):
        return self._kappa


def initial_model() -> GaussianModel:
    """Moments of Uniform(0, pi/2), the distribution the truth starts from."""
    width = TRUTH_HIGH - TRUTH_LOW
    return GaussianModel((TRUTH_LOW + TRUTH_HIGH) / 2, width ** 2 / 12)


def pgh_design(model: GaussianModel, rng: np.random.Generator):
    """Particle guess heuristic: ``x_-`` drawn from the model, ``t = 1/sqrt(tr Sigma)``."""
    trace = model.trace
    if not trace > 0:
        raise DegenerateModelError("cannot design an experiment for a zero-variance model")
    x_minus = float(sample_prior(model, rng)[0])
    return x_minus, 1.0 / math.sqrt(trace)


@dataclass(frozen=True)
class DriftingTruth:
    current: float
    step_sigma: float = STEP_SIGMA

    def __post_init__(self):
        if not self.step_sigma >= 0:
            raise ValueError("step_sigma must be >= 0")


def initial_truth(rng: np.random.Generator, step_sigma: float = STEP_SIGMA) -> DriftingTruth:
    return DriftingTruth(float(rng.uniform(TRUTH_LOW, TRUTH_HIGH)), step_sigma)


def advance_truth(truth: DriftingTruth, rng: np.random.Generator) -> DriftingTruth:
    if truth.step_sigma == 0:
        return truth
    return DriftingTruth(truth.current + float(rng.normal(0.0, truth.step_sigma)), truth.step_sigma)


def simulate_outcome(truth: DriftingTruth, x_minus: float, t: float, rng: np.random.Generator) -> int:
    if not t > 0:
        raise ValueError("evolution time must be > 0")
    p1 = float(freq_likelihood(1, truth.current, x_minus, t))
    return int(rng.random() < p1)


@dataclass(frozen=True)
class ExperimentRecord:
    trial: int
    k: int
    x_minus: float
    t: float
    outcome: int
    n_accepted: int
    mean: float
    trace_cov: float
    truth: float
    loss: float


CSV_COLUMNS = tuple(f.name for f in fields(ExperimentRecord))


def trial_seeds(seed: int, trials: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def run_tracking(n_updates: int, attempts: int = 100, recovery: float = 0.02, kappa: float = 1.0,
                 eta: float = WALK_VARIANCE, seed: int = 0, step_sigma: float = STEP_SIGMA,
                 trial: int = 0, with_initial: bool = False):
    """One tracking run of ``n_updates`` measurements.

    Per update: diffuse by ``eta``, design ``(x_-, t)``, measure the current
    truth, let the truth step, then update the filter. The loss recorded at
    update ``k`` is the squared error of the posterior mean against the
    truth after its step. With ``with_initial`` the loss of the starting
    model against ``x(0)`` is returned as well, as ``(records, loss0)``.
    """
    if n_updates < 1:
        raise ValueError("n_updates must be >= 1")
    rng = np.random.default_rng(seed)
    truth = initial_truth(rng, step_sigma)
    model = initial_model()
    initial_loss = float((model.mean[0] - truth.current) ** 2)
    kernel = DiffusionKernel(eta)
    config = RFConfig(attempts=attempts, recovery_factor=recovery)
    records = []
    for k in range(1, n_updates + 1):
        model = diffuse(model, kernel, 1.0)
        x_minus, t = pgh_design(model, rng)
        outcome = simulate_outcome(truth, x_minus, t, rng)
        truth = advance_truth(truth, rng)
        model, n_a, _ = rf_update([outcome], model, FreqLikelihood(x_minus, t, kappa), config, rng)
        mean = float(model.mean[0])
        records.append(
            ExperimentRecord(trial, k, x_minus, t, outcome, n_a, mean, model.trace,
                             truth.current, (mean - truth.current) ** 2)
        )
    if with_initial:
        return records, initial_loss
    return records


def _trial(job, **kwargs):
    index, seed = job
    return run_tracking(seed=seed, trial=index, with_initial=True, **kwargs)


def run_trials(trials: int, n_updates: int, seed: int = 0, workers=None, **kwargs):
    """Independent tracking runs, one derived seed each.

    Returns ``(records, initial_losses)`` with records ordered by trial then k.
    """
    jobs = list(enumerate(trial_seeds(seed, trials)))
    results = pmap(partial(_trial, n_updates=n_updates, **kwargs), jobs, workers=workers)
    records = [r for recs, _ in results for r in recs]
    return records, np.array([loss0 for _, loss0 in results])


def loss_matrix(records: Sequence[ExperimentRecord]) -> np.ndarray:
    """Losses arranged as ``(trials, updates)``."""
    trials = max(r.trial for r in records) + 1
    updates = max(r.k for r in records)
    out = np.full((trials, updates), np.nan)
    for r in records:
        out[r.trial, r.k - 1] = r.loss
    return out


def median_loss_curve(records) -> np.ndarray:
    return np.median(loss_matrix(records), axis=0)


def kappa_sweep(kappas: Sequence[float], n_measurements: int = 100, attempts: int = 100,
                recovery: float = 0.02, trials: int = 200, seed: int = 0, workers=None, **kwargs):
    """Normalized median loss after ``n_measurements`` for each kappa.

    Every kappa reuses the same trial seeds, so rows differ only through
    kappa. Returns a list of ``(kappa, median final loss / median initial loss)``.
    """
    for kappa in kappas:
        if not 0 < kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    rows = []
    for kappa in kappas:
        records, initial = run_trials(trials, n_measurements, seed=seed, attempts=attempts,
                                      recovery=recovery, kappa=kappa, workers=workers, **kwargs)
        final = loss_matrix(records)[:, -1]
        rows.append((float(kappa), float(np.median(final) / np.median(initial))))
    return rows


def record_row(record: ExperimentRecord):
    return astuple(record)
