"""Synthetic cooperative games: coalition -> payoff, with JSON round-tripping.

Three flavours: an explicit table over bitmasks, an additive rule
v(S) = sum of per-player weights, and a cardinality rule v(S) = h(|S|).
Games plug into the explainers through :class:`stableshap.models.GameModel`,
which evaluates coalitions directly with no background data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GameTableError

RULE_TABLE = "table"
RULE_ADDITIVE = "additive"
RULE_CARDINALITY = "cardinality"


def masks_to_ints(masks: np.ndarray) -> np.ndarray:
    """Pack boolean masks (n, M) into integers with bit i = feature i."""
    m = masks.shape[-1]
    if m > 62:
        raise ValueError("bit packing supports at most 62 features")
    weights = np.left_shift(np.int64(1), np.arange(m, dtype=np.int64))
    return masks.astype(np.int64) @ weights


def bitstring_to_int(s: str) -> int:
    # character i of the string is feature i
    return sum(1 << i for i, c in enumerate(s) if c == "1")


def int_to_bitstring(mask: int, n_features: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n_features))


@dataclass(frozen=True)
class SyntheticGame:
    """A characteristic function over subsets of M players."""

    n_players: int
    rule: str
    table: dict[int, float] | None = None
    weights: np.ndarray | None = None
    by_size: np.ndarray | None = None
    _dense: np.ndarray | None = field(default=None, repr=False, compare=False)

    @classmethod
    def from_table(cls, n_players: int, values: dict[int, float]) -> "SyntheticGame":
        if n_players < 2:
            raise ValueError("games need at least 2 players")
        table = {int(mask): float(v) for mask, v in values.items()}
        if 0 not in table:
            raise GameTableError("table must define the empty coalition (mask 0)")
        dense = None
        if len(table) == 2**n_players and n_players <= 24:
            dense = np.empty(2**n_players)
            for mask, v in table.items():
                dense[mask] = v
        return cls(n_players, RULE_TABLE, table=table, _dense=dense)

    @classmethod
    def additive(cls, player_weights) -> "SyntheticGame":
        w = np.asarray(player_weights, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise ValueError("additive game needs a weight per player, at least 2")
        return cls(len(w), RULE_ADDITIVE, weights=w)

    @classmethod
    def cardinality(cls, n_players: int, values_by_size) -> "SyntheticGame":
        h = np.asarray(values_by_size, dtype=float)
        if len(h) != n_players + 1:
            raise ValueError(
                f"cardinality game over {n_players} players needs {n_players + 1} "
                f"values (sizes 0..{n_players}), got {len(h)}"
            )
        return cls(n_players, RULE_CARDINALITY, by_size=h)

    @classmethod
    def random_table(cls, n_players: int, rng: np.random.Generator,
                     scale: float = 1.0, v_empty: float = 0.0) -> "SyntheticGame":
        """Dense random game: every proper value N(0, scale), fixed v(empty)."""
        values = rng.normal(0.0, scale, size=2**n_players)
        values[0] = v_empty
        return cls.from_table(n_players, dict(enumerate(values)))

    def value_of_mask(self, mask: int) -> float:
        if self.rule == RULE_ADDITIVE:
            return float(sum(self.weights[i] for i in range(self.n_players) if mask >> i & 1))
        if self.rule == RULE_CARDINALITY:
            return float(self.by_size[bin(mask).count("1")])
        try:
            return self.table[mask]
        except KeyError:
            raise GameTableError(
                f"mask {int_to_bitstring(mask, self.n_players)} missing from game table"
            ) from None

    def value_of_set(self, players) -> float:
        mask = 0
        for i in players:
            if not 0 <= i < self.n_players:
                raise ValueError(f"player {i} out of range for M={self.n_players}")
            mask |= 1 << i
        return self.value_of_mask(mask)

    def coalition_values(self, masks: np.ndarray) -> np.ndarray:
        """Vectorized payoff lookup for a boolean mask matrix (n, M)."""
        masks = np.asarray(masks, dtype=bool)
        if masks.ndim != 2 or masks.shape[1] != self.n_players:
            raise ValueError(f"expected masks of shape (n, {self.n_players})")
        if self.rule == RULE_ADDITIVE:
            return masks @ self.weights
        if self.rule == RULE_CARDINALITY:
            return self.by_size[masks.sum(axis=1)]
        ints = masks_to_ints(masks)
        if self._dense is not None:
            return self._dense[ints]
        return np.array([self.value_of_mask(int(v)) for v in ints])

    def to_json_dict(self) -> dict:
        if self.rule == RULE_ADDITIVE:
            return {"M": self.n_players, "rule": RULE_ADDITIVE,
                    "weights": self.weights.tolist()}
        if self.rule == RULE_CARDINALITY:
            return {"M": self.n_players, "rule": RULE_CARDINALITY,
                    "by_size": self.by_size.tolist()}
        return {"M": self.n_players,
                "values": {int_to_bitstring(mask, self.n_players): v
                           for mask, v in sorted(self.table.items())}}

    @classmethod
    def from_json_dict(cls, spec: dict) -> "SyntheticGame":
        n_players = int(spec["M"])
        rule = spec.get("rule")
        if rule == RULE_ADDITIVE:
            return cls.additive(spec["weights"])
        if rule == RULE_CARDINALITY:
            return cls.cardinality(n_players, spec["by_size"])
        if rule not in (None, RULE_TABLE):
            raise ValueError(f"unknown game rule: {rule!r}")
        raw = spec["values"]
        values = {}
        for key, v in raw.items():
            if len(key) != n_players:
                raise ValueError(f"mask {key!r} does not have M={n_players} bits")
            values[bitstring_to_int(key)] = float(v)
        return cls.from_table(n_players, values)

    @classmethod
    def load(cls, path) -> "SyntheticGame":
        with open(Path(path)) as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path) -> None:
        with open(Path(path), "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)


def game_value(game: SyntheticGame, players) -> float:
    """Payoff of the coalition given as a collection of player indices."""
    return game.value_of_set(players)
