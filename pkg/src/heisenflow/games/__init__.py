"""Decision-theoretic game values checked against the trace rule."""

from .core import (
    BRACKET_TOL,
    DIMENSION_CAP,
    GAME_TOL,
    BracketingResult,
    Game,
    MixedGameSpec,
    PayoffFunction,
    RationalWeights,
    ValueReport,
    born_oracle,
    payoff_permute,
    payoff_sum,
)
from .stages import (
    STAGE4_CASES,
    game_value,
    stage1_value,
    stage2_value,
    stage3_value,
    stage4_value,
)

__all__ = [
    "BRACKET_TOL",
    "DIMENSION_CAP",
    "GAME_TOL",
    "STAGE4_CASES",
    "BracketingResult",
    "Game",
    "MixedGameSpec",
    "PayoffFunction",
    "RationalWeights",
    "ValueReport",
    "born_oracle",
    "game_value",
    "payoff_permute",
    "payoff_sum",
    "stage1_value",
    "stage2_value",
    "stage3_value",
    "stage4_value",
]
