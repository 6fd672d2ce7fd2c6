"""Streaming Bayes factors from acceptance counts.

Each rejection-filter update accepts ``N_a`` of ``m`` candidates, and
``N_a`` is binomial with mean ``m P(E)``. Summing hedged log estimates of
``P(E)`` over updates gives a running log total likelihood per model.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import IncomparableRegistersError
from .gaussian import GaussianModel
from .inference import FunctionLikelihood, RFConfig, rf_update

DEFAULT_HEDGE = 0.5


@dataclass(frozen=True)
class LogLikelihoodRegister:
    value: float = 0.0
    hedging: float = DEFAULT_HEDGE
    updates_seen: int = 0

    def __post_init__(self):
        if not self.hedging > 0:
            raise ValueError("hedging parameter must be > 0")


def register_increment(accepted: int, attempts: int, hedging: float = DEFAULT_HEDGE) -> float:
    """``ln((N_a + beta) / (m + 2 beta))``."""
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    if not 0 <= accepted <= attempts:
        raise ValueError(f"accepted count {accepted} outside [0, {attempts}]")
    return math.log((accepted + hedging) / (attempts + 2 * hedging))


def update_register(reg: LogLikelihoodRegister, accepted: int, attempts: int) -> LogLikelihoodRegister:
    inc = register_increment(accepted, attempts, reg.hedging)
    return replace(reg, value=reg.value + inc, updates_seen=reg.updates_seen + 1)


def log_bayes_factor(reg_a: LogLikelihoodRegister, reg_b: LogLikelihoodRegister) -> float:
    if reg_a.updates_seen != reg_b.updates_seen:
        raise IncomparableRegistersError(
            f"registers saw {reg_a.updates_seen} and {reg_b.updates_seen} updates"
        )
    return reg_a.value - reg_b.value


def bayes_factor(reg_a: LogLikelihoodRegister, reg_b: LogLikelihoodRegister) -> float:
    """Estimated Bayes factor; values above 1 favour model A.

    Both registers must have been fed the same evidence stream with the
    same number of attempts per update, so the ``ln(m + 2 beta)`` terms
    cancel. Overflows to ``inf`` (or underflows to 0) only when the log
    factor is beyond double range.
    """
    log_k = log_bayes_factor(reg_a, reg_b)
    try:
        return math.exp(log_k)
    except OverflowError:
        return math.inf


# Two-model coin instance used by the CLI demo and the acceptance tests.
# Model A: P(1|x) = clip(x, 0, 1), a coin of unknown bias x.
# Model B: P(1|x) = 1/2, a fair coin whatever x is.

def _biased_coin(outcome, xs):
    p1 = np.clip(np.asarray(xs)[:, 0], 0.0, 1.0)
    return p1 if outcome == 1 else 1.0 - p1


def _fair_coin(outcome, xs):
    return np.full(len(xs), 0.5)


COIN_MODELS = {"A": FunctionLikelihood(_biased_coin), "B": FunctionLikelihood(_fair_coin)}
COIN_PRIOR = GaussianModel(0.5, 0.25 ** 2)


def track_two_models(n_updates: int, attempts: int = 100, hedging: float = DEFAULT_HEDGE,
                     truth_bias: float = 0.8, seed: int = 0, recovery: float = 0.02):
    """Feed one coin-flip stream drawn from model A to both models.

    Each model runs its own rejection filter on its own random stream.
    Yields ``(k, ell_A, ell_B, K_hat)`` after every update.
    """
    data_ss, a_ss, b_ss = np.random.SeedSequence(seed).spawn(3)
    data_rng = np.random.default_rng(data_ss)
    rngs = {"A": np.random.default_rng(a_ss), "B": np.random.default_rng(b_ss)}
    beliefs = {name: COIN_PRIOR for name in COIN_MODELS}
    regs = {name: LogLikelihoodRegister(hedging=hedging) for name in COIN_MODELS}
    config = RFConfig(attempts=attempts, recovery_factor=recovery)
    for k in range(1, n_updates + 1):
        outcome = int(data_rng.random() < truth_bias)
        for name, lik in COIN_MODELS.items():
            beliefs[name], n_a, _ = rf_update([outcome], beliefs[name], lik, config, rngs[name])
            regs[name] = update_register(regs[name], n_a, attempts)
        yield k, regs["A"].value, regs["B"].value, bayes_factor(regs["A"], regs["B"])
