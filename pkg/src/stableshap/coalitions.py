"""Coalition masks, the layer taxonomy, and coalition weights.

A coalition over M features is a binary mask: entry i is True when feature i
keeps the explained instance's value and False when it is marginalized away.
Layer i groups the coalitions with exactly i features present or i features
absent; every coalition in a layer shares one weight, and the weight shrinks
as i moves toward M/2.

All functions here are pure and deterministic; enumeration order is pinned
(colexicographic over the present-feature index sets, each set immediately
followed by its complement) so that repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


@dataclass(frozen=True)
class Coalition:
    """Binary inclusion mask over M features."""

    mask: tuple[bool, ...]

    def __post_init__(self):
        if len(self.mask) < 2:
            raise ValueError("coalitions need at least 2 features")

    @classmethod
    def from_indices(cls, n_features: int, present) -> "Coalition":
        bits = [False] * n_features
        for i in present:
            if not 0 <= i < n_features:
                raise ValueError(f"feature index {i} out of range for M={n_features}")
            bits[i] = True
        return cls(tuple(bits))

    @classmethod
    def from_bitstring(cls, s: str) -> "Coalition":
        """Parse a mask like "1010": character i is feature i."""
        if set(s) - {"0", "1"}:
            raise ValueError(f"not a binary mask string: {s!r}")
        return cls(tuple(c == "1" for c in s))

    @property
    def n_features(self) -> int:
        return len(self.mask)

    @property
    def size(self) -> int:
        return sum(self.mask)

    def complement(self) -> "Coalition":
        return Coalition(tuple(not b for b in self.mask))

    def present_indices(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.mask) if b)

    def to_bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.mask)

    def to_array(self) -> np.ndarray:
        return np.array(self.mask, dtype=bool)


@dataclass(frozen=True)
class KernelWeight:
    """Coalition weight; infinite exactly for the empty and grand coalitions.

    The infinite case is a flag rather than ``float('inf')`` so it can never
    leak into a regression weight vector.
    """

    finite: bool
    _value: float = 0.0

    @classmethod
    def of(cls, value: float) -> "KernelWeight":
        return cls(finite=True, _value=float(value))

    @classmethod
    def infinite(cls) -> "KernelWeight":
        return cls(finite=False)

    @property
    def value(self) -> float:
        if not self.finite:
            raise ValueError("infinite coalition weight has no numeric value")
        return self._value


def _check_m(n_features: int) -> None:
    if n_features < 2:
        raise ValueError(f"need at least 2 features, got M={n_features}")


def n_layers(n_features: int) -> int:
    """Number of layers for M features: floor(M/2)."""
    _check_m(n_features)
    return n_features // 2


def _check_layer(n_features: int, layer: int) -> None:
    _check_m(n_features)
    if not 1 <= layer <= n_features // 2:
        raise ValueError(
            f"layer {layer} invalid for M={n_features}; valid range is 1..{n_features // 2}"
        )


def layer_size(n_features: int, layer: int) -> int:
    """Number of coalitions in a layer.

    2*C(M,i) in general; the two halves coincide when M is even and i = M/2,
    leaving C(M,i).
    """
    _check_layer(n_features, layer)
    c = comb(n_features, layer)
    return c if 2 * layer == n_features else 2 * c


def kernel_weight(n_features: int, size: int) -> KernelWeight:
    """Weight of a coalition with `size` features present.

    (M-1) / (C(M,s) * s * (M-s)) for proper coalitions; the empty and grand
    coalitions get the infinite marker (they are handled as constraints, not
    regression rows).
    """
    _check_m(n_features)
    if not 0 <= size <= n_features:
        raise ValueError(f"coalition size {size} out of range for M={n_features}")
    if size in (0, n_features):
        return KernelWeight.infinite()
    value = (n_features - 1) / (comb(n_features, size) * size * (n_features - size))
    return KernelWeight.of(value)


def layer_total_weight(n_features: int, layer: int) -> float:
    """Sum of coalition weights over one full layer."""
    return layer_size(n_features, layer) * kernel_weight(n_features, layer).value


def complete_layer_budgets(n_features: int) -> list[tuple[int, int]]:
    """Cumulative layer sizes: the budgets at which sampling is fully deterministic."""
    _check_m(n_features)
    out = []
    total = 0
    for i in range(1, n_features // 2 + 1):
        total += layer_size(n_features, i)
        out.append((i, total))
    return out


def _colex_combinations(n_features: int, k: int) -> list[tuple[int, ...]]:
    # colexicographic: ordered by largest element, then recursively
    return sorted(combinations(range(n_features), k), key=lambda t: t[::-1])


@lru_cache(maxsize=64)
def layer_masks(n_features: int, layer: int) -> np.ndarray:
    """Canonical-order boolean mask matrix for one layer, shape (layer_size, M).

    Row order matches :func:`enumerate_layer`. Cached and marked read-only;
    callers must copy before mutating.
    """
    _check_layer(n_features, layer)
    sets = _colex_combinations(n_features, layer)
    base = np.zeros((len(sets), n_features), dtype=bool)
    rows = np.arange(len(sets))[:, None]
    base[rows, np.array(sets)] = True
    if 2 * layer == n_features:
        masks = base
    else:
        # interleave each size-i mask with its complement
        masks = np.empty((2 * len(sets), n_features), dtype=bool)
        masks[0::2] = base
        masks[1::2] = ~base
    masks.setflags(write=False)
    return masks


def enumerate_layer(n_features: int, layer: int) -> list[Coalition]:
    """Every coalition of a layer exactly once, in the pinned canonical order."""
    masks = layer_masks(n_features, layer)
    return [Coalition(tuple(bool(b) for b in row)) for row in masks]


def colex_unrank(rank: int, k: int) -> tuple[int, ...]:
    """The rank-th k-subset in colexicographic order (combinatorial number system)."""
    if k < 1 or rank < 0:
        raise ValueError("need k >= 1 and rank >= 0")
    out = []
    r = rank
    for j in range(k, 0, -1):
        c = j - 1
        while comb(c + 1, j) <= r:
            c += 1
        r -= comb(c, j)
        out.append(c)
    return tuple(reversed(out))


def layer_member(n_features: int, layer: int, position: int) -> np.ndarray:
    """The mask at `position` in a layer's canonical order, without enumerating it.

    Lets samplers draw from layers far too large to materialize.
    """
    size = layer_size(n_features, layer)
    if not 0 <= position < size:
        raise ValueError(f"position {position} out of range for layer of size {size}")
    if 2 * layer == n_features:
        rank, complemented = position, False
    else:
        rank, complemented = divmod(position, 2)
        complemented = bool(complemented)
    mask = np.zeros(n_features, dtype=bool)
    mask[list(colex_unrank(rank, layer))] = True
    return ~mask if complemented else mask
