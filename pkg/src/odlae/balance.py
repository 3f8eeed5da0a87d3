"""Adaptive balancing of reconstruction vs prediction loss.

The two coefficients form a point on the 2-simplex. Each step every
coefficient is discounted by its discount factor raised to the (clipped)
loss it is responsible for, then the pair is renormalized, so whichever
objective is currently hurting more gets down-weighted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InvalidInputError


@dataclass
class TradeoffState:
    recon_weight: float = 0.5  # coefficient on the reconstruction loss
    pred_weight: float = 0.5  # coefficient on the prediction loss
    recon_discount: float = 0.99
    pred_discount: float = 0.99
    adaptive: bool = True  # False freezes the pair (fixed-weight comparison mode)

    def __post_init__(self):
        if not (0.0 < self.recon_weight < 1.0 and 0.0 < self.pred_weight < 1.0):
            raise InvalidInputError("trade-off weights must lie strictly inside (0, 1)")
        if abs(self.recon_weight + self.pred_weight - 1.0) > 1e-9:
            raise InvalidInputError("trade-off weights must sum to 1")
        for d in (self.recon_discount, self.pred_discount):
            if not 0.0 < d < 1.0:
                raise InvalidInputError("discount factors must lie in (0, 1)")


def _check_losses(recon_loss: float, pred_loss: float) -> None:
    if not (math.isfinite(recon_loss) and math.isfinite(pred_loss)):
        raise InvalidInputError("losses must be finite")
    if recon_loss < 0.0 or pred_loss < 0.0:
        raise InvalidInputError("losses must be nonnegative")


def total_loss(recon_loss: float, pred_loss: float, state: TradeoffState) -> float:
    _check_losses(recon_loss, pred_loss)
    return state.recon_weight * recon_loss + state.pred_weight * pred_loss


def _normalized_pair(term_re: float, term_pre: float) -> tuple[float, float]:
    z = term_re + term_pre
    return term_re / z, term_pre / z


def update_tradeoffs(state: TradeoffState, recon_loss: float, pred_loss: float) -> TradeoffState:
    """Discount each coefficient by discount**min(loss, 1), then renormalize.

    The exponent is clipped at 1 so a transiently huge prediction loss cannot
    collapse its coefficient in one step; the unclipped losses still drive
    the gradients elsewhere. No-op when the state is non-adaptive.
    """
    _check_losses(recon_loss, pred_loss)
    if not state.adaptive:
        return state
    term_re = state.recon_weight * state.recon_discount ** min(recon_loss, 1.0)
    term_pre = state.pred_weight * state.pred_discount ** min(pred_loss, 1.0)
    state.recon_weight, state.pred_weight = _normalized_pair(term_re, term_pre)
    return state
