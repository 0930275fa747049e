"""
Technical echelon: the technology level theta.

Theta is a plain parameter vector. It scales the defender budget, sharpens
contests, shifts operational context payoffs, scales defender action costs
and masks actions per echelon. No game is solved at this echelon.

Example:
    tech = TechLevel(budget_multiplier=1.2, context_payoff_shift=0.5)
    tech.masked('operational', ['scan', 'patch'], side='d')

"""
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field

ECHELONS = ("policy", "strategic", "operational", "tactical", "technical")


class TechLevel(BaseModel):
    """Technology level theta."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    budget_multiplier: float = Field(1.0, gt=0)
    contest_sharpness: float = Field(1.0, gt=0)
    context_payoff_shift: float = 0.0
    cost_factor: float = Field(1.0, ge=0)
    # echelon -> identifiers removed for that side
    action_mask_d: Dict[str, List[str]] = Field(default_factory=dict)
    action_mask_a: Dict[str, List[str]] = Field(default_factory=dict)

    def masked(self, echelon, names, side="d"):
        """Return `names` without the identifiers masked at `echelon`."""
        mask = self.action_mask_d if side == "d" else self.action_mask_a
        removed = set(mask.get(echelon, ()))

        return [n for n in names if n not in removed]
