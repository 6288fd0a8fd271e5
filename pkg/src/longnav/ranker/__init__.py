from .backend import ExternalBackend, HeuristicBackend, RankingService, make_backend
from .camera import BEHIND, CameraModel, UnprojectableTrajectory, number_right_to_left, project_point
from .heuristic import SceneFacts, extract_facts, heuristic_rank
from .overlay import read_ppm, render_overlay, write_ppm
from .prompt import DIRECTIONS, PromptSpec, build_prompt, goal_direction
from .response import MODES, RankResponse, Unparseable, build_response, parse_response

__all__ = [
    "BEHIND",
    "CameraModel",
    "DIRECTIONS",
    "ExternalBackend",
    "HeuristicBackend",
    "MODES",
    "PromptSpec",
    "RankResponse",
    "RankingService",
    "SceneFacts",
    "Unparseable",
    "UnprojectableTrajectory",
    "build_prompt",
    "build_response",
    "extract_facts",
    "goal_direction",
    "heuristic_rank",
    "make_backend",
    "number_right_to_left",
    "parse_response",
    "project_point",
    "read_ppm",
    "render_overlay",
    "write_ppm",
]
