from .scenario_io import ParseError, format_scenario, load_scenario, parse_scenario, save_scenario
from .sensing import RangeScan, beam_angles, cast_rays, sense_range, sense_semantics
from .world import (
    PED_RADIUS,
    V_MAX,
    W_MAX,
    WHEELED_TRAVERSABLE,
    ActionOutOfLimits,
    Label,
    Pedestrian,
    RobotState,
    SemanticGrid,
    Sign,
    WorldState,
    collision_check,
    integrate_unicycle,
    step,
    wrap_angle,
)

__all__ = [
    "ActionOutOfLimits",
    "Label",
    "PED_RADIUS",
    "ParseError",
    "Pedestrian",
    "RangeScan",
    "RobotState",
    "SemanticGrid",
    "Sign",
    "V_MAX",
    "W_MAX",
    "WHEELED_TRAVERSABLE",
    "WorldState",
    "beam_angles",
    "cast_rays",
    "collision_check",
    "format_scenario",
    "integrate_unicycle",
    "load_scenario",
    "parse_scenario",
    "save_scenario",
    "sense_range",
    "sense_semantics",
    "step",
    "wrap_angle",
]
