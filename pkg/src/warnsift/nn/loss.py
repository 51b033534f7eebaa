"""Focal loss over sigmoid probabilities.

Per sample, with p the predicted probability of the sensitive class and
y the 0/1 label:

    p_t  = p when y = 1, else 1 - p
    a_t  = alpha when y = 1, else 1 - alpha
    FL   = -a_t * (1 - p_t)^gamma * ln(p_t)

Probabilities are clamped to [eps, 1 - eps] before the loss; gradients
are zero in the clamped region.  gamma = 0 reduces the loss to
alpha-weighted binary cross-entropy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-7


@dataclass
class FocalLossResult:
    value: float | np.ndarray
    dprobs: np.ndarray  # gradient of the reduced value wrt each probability


def focal_loss(
    probs: np.ndarray,
    labels: np.ndarray,
    alpha: float = 0.05,
    gamma: float = 2.0,
    reduction: str = "mean",
    eps: float = EPS,
) -> FocalLossResult:
    if reduction not in ("mean", "sum", "none"):
        raise ValueError(f"unknown reduction: {reduction!r}")
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if probs.shape != labels.shape:
        raise ValueError("probs and labels must share a shape")

    clamped = np.clip(probs, eps, 1.0 - eps)
    positive = labels >= 0.5
    p_t = np.where(positive, clamped, 1.0 - clamped)
    a_t = np.where(positive, alpha, 1.0 - alpha)
    one_minus = 1.0 - p_t
    per_sample = -a_t * one_minus**gamma * np.log(p_t)

    # dFL/dp_t; the gamma term vanishes identically at gamma = 0 but
    # evaluates to 0 * inf at p_t = 1, so branch explicitly.
    if gamma == 0.0:
        dp_t = -a_t / p_t
    else:
        dp_t = a_t * (gamma * one_minus ** (gamma - 1.0) * np.log(p_t) - one_minus**gamma / p_t)
    sign = np.where(positive, 1.0, -1.0)
    inside = (probs > eps) & (probs < 1.0 - eps)
    dprobs = np.where(inside, sign * dp_t, 0.0)

    if reduction == "mean":
        n = max(per_sample.size, 1)
        return FocalLossResult(float(per_sample.mean()), dprobs / n)
    if reduction == "sum":
        return FocalLossResult(float(per_sample.sum()), dprobs)
    return FocalLossResult(per_sample, dprobs)


__all__ = ["EPS", "FocalLossResult", "focal_loss"]
