"""Coalition payoffs for black-box models.

The payoff of a coalition is the model's expected output when present
features keep the explained instance's values and absent features are
replaced by background-data values, averaged over the background rows.
Direct game adapters skip the substitution entirely.
"""

from __future__ import annotations

import numpy as np

from .coalitions import Coalition


def as_mask_matrix(coalitions, n_features: int | None = None) -> np.ndarray:
    """Normalize a list of Coalitions or an array-like into a bool matrix (n, M)."""
    if isinstance(coalitions, np.ndarray):
        masks = coalitions.astype(bool, copy=False)
        if masks.ndim == 1:
            masks = masks.reshape(1, -1)
    else:
        items = list(coalitions)
        if items and isinstance(items[0], Coalition):
            masks = np.array([c.mask for c in items], dtype=bool)
        else:
            masks = np.asarray(items, dtype=bool)
        if masks.ndim == 1:
            masks = masks.reshape(1, -1) if len(items) else masks.reshape(0, 0)
    if n_features is not None and masks.size and masks.shape[1] != n_features:
        raise ValueError(f"masks have {masks.shape[1]} features, expected {n_features}")
    return masks


def substitute(masks: np.ndarray, x: np.ndarray, background: np.ndarray) -> np.ndarray:
    """Masked input rows: (n_masks * B, M), background varying fastest."""
    x = np.asarray(x, dtype=float).reshape(-1)
    background = np.asarray(background, dtype=float)
    if background.ndim != 2 or background.shape[1] != len(x):
        raise ValueError("background rows must match the instance's feature count")
    n, m = masks.shape
    b = background.shape[0]
    rows = np.where(masks[:, None, :], x[None, None, :], background[None, :, :])
    return rows.reshape(n * b, m)


def evaluate_batch(coalitions, x, background, model) -> np.ndarray:
    """Coalition payoffs, elementwise; one model batch for the whole request."""
    masks = as_mask_matrix(coalitions, getattr(model, "n_features", None))
    if masks.shape[0] == 0:
        return np.empty(0)
    if hasattr(model, "coalition_values"):
        return model.coalition_values(masks)
    if x is None or background is None:
        raise ValueError("row models need an instance and a background set")
    x = np.asarray(x, dtype=float).reshape(-1)
    background = np.asarray(background, dtype=float)
    if background.shape[0] < 1:
        raise ValueError("background set needs at least one row")
    rows = substitute(masks, x, background)
    preds = np.asarray(model.predict(rows), dtype=float).reshape(-1)
    if len(preds) != len(rows):
        raise ValueError(f"model returned {len(preds)} outputs for {len(rows)} rows")
    return preds.reshape(masks.shape[0], background.shape[0]).mean(axis=1)


def evaluate(coalition, x, background, model) -> float:
    """Payoff of a single coalition."""
    return float(evaluate_batch([coalition], x, background, model)[0])


def anchors(x, background, model, n_features: int | None = None) -> tuple[float, float]:
    """(payoff of the empty coalition, payoff of the grand coalition).

    The first anchors the surrogate intercept, the second is the prediction
    the attributions must add up to.
    """
    m = n_features if n_features is not None else model.n_features
    masks = np.zeros((2, m), dtype=bool)
    masks[1, :] = True
    empty_v, full_v = evaluate_batch(masks, x, background, model)
    return float(empty_v), float(full_v)
