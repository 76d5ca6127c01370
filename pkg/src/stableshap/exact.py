"""Ground-truth attribution values by exhaustive enumeration.

Two independent routes: the subset-sum form over all 2^M coalitions, and a
permutation form that averages marginal contributions over all M! player
orderings. They must agree; the second exists purely to check the first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import factorial

import numpy as np

from .errors import OracleCapError
from .games import SyntheticGame
from .models import GameModel
from .value_function import evaluate_batch

DEFAULT_CAP = 20
PERMUTATION_CAP = 8

_EVAL_CHUNK = 8192


@dataclass(frozen=True)
class ExactValues:
    """Exhaustively computed attribution values."""

    phis: tuple[float, ...]
    phi0: float
    eval_count: int

    @property
    def n_features(self) -> int:
        return len(self.phis)

    def phi_array(self) -> np.ndarray:
        return np.array(self.phis)


def all_coalition_values(x, model, background, n_features: int) -> np.ndarray:
    """Payoffs of every coalition, indexed by mask integer (bit i = feature i)."""
    total = 2**n_features
    bits = np.arange(n_features)
    out = np.empty(total)
    for start in range(0, total, _EVAL_CHUNK):
        ints = np.arange(start, min(start + _EVAL_CHUNK, total))
        masks = (ints[:, None] >> bits[None, :] & 1).astype(bool)
        out[start:start + len(ints)] = evaluate_batch(masks, x, background, model)
    return out


def _subset_weights(n_features: int) -> np.ndarray:
    # (s-1)! (M-s)! / M!, exact rationals converted once
    fact_m = factorial(n_features)
    weights = np.empty(n_features + 1)
    weights[0] = 0.0  # unused: a coalition containing i has size >= 1
    for s in range(1, n_features + 1):
        weights[s] = float(Fraction(factorial(s - 1) * factorial(n_features - s), fact_m))
    return weights


def _phis_from_values(values: np.ndarray, n_features: int) -> np.ndarray:
    ints = np.arange(2**n_features)
    sizes = np.zeros(len(ints), dtype=np.int64)
    for i in range(n_features):
        sizes += ints >> i & 1
    weights = _subset_weights(n_features)
    phis = np.empty(n_features)
    for i in range(n_features):
        with_i = ints[(ints >> i & 1) == 1]
        deltas = values[with_i] - values[with_i ^ (1 << i)]
        phis[i] = float(weights[sizes[with_i]] @ deltas)
    return phis


def exact_shap(x, model, background, cap: int = DEFAULT_CAP) -> ExactValues:
    """Exact attribution values by the subset-sum formula over all coalitions."""
    m = model.n_features
    if m > cap:
        raise OracleCapError(m, cap)
    values = all_coalition_values(x, model, background, m)
    phis = _phis_from_values(values, m)
    return ExactValues(tuple(float(v) for v in phis), float(values[0]), 2**m)


def exact_shap_game(game: SyntheticGame, cap: int = DEFAULT_CAP) -> ExactValues:
    """Exact values of a synthetic game; no instance or background involved."""
    return exact_shap(None, GameModel(game), None, cap=cap)


def exact_shap_permutation(game: SyntheticGame,
                           cap: int = PERMUTATION_CAP) -> ExactValues:
    """Independent oracle: average marginal contribution over all orderings."""
    m = game.n_players
    if m > cap:
        raise OracleCapError(m, cap, required=f"{factorial(m)} player orderings")
    values = all_coalition_values(None, GameModel(game), None, m)
    acc = [0.0] * m
    for order in permutations(range(m)):
        mask = 0
        prev = values[0]
        for player in order:
            mask |= 1 << player
            cur = values[mask]
            acc[player] += cur - prev
            prev = cur
    scale = factorial(m)
    phis = tuple(float(a / scale) for a in acc)
    return ExactValues(phis, float(values[0]), 2**m)
