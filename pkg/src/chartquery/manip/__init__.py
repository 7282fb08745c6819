"""Chart manipulations: planning task answers and executing them as keyframes."""

from .derive import compute_derive
from .executor import Keyframe, apply, apply_all, keyframes_to_json
from .planner import PlanPolicy, plan
from .steps import (
    PHASES,
    Annotate,
    Derive,
    Highlight,
    ManipStep,
    Rearrange,
    Reduce,
    Reencode,
    Rescale,
    plan_to_json,
    step_to_json,
)

__all__ = [
    "PHASES",
    "Annotate",
    "Derive",
    "Highlight",
    "Keyframe",
    "ManipStep",
    "PlanPolicy",
    "Rearrange",
    "Reduce",
    "Reencode",
    "Rescale",
    "apply",
    "apply_all",
    "compute_derive",
    "keyframes_to_json",
    "plan",
    "plan_to_json",
    "step_to_json",
]
