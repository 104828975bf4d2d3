"""Offline video synopsis by temporal re-placement of object tubes."""

__version__ = "0.1.0"

from .model import (BoundingBox, FixedShapeTrack, FrameGeometry, SynopsisConstraints,  # noqa: E402
                    SynopsisState, Topology, Tube, track_to_tube, validate_state)
from .collision import box_overlap_area, count_collisions, tubes_collide  # noqa: E402
from .cost import CostBreakdown, temporal_cost, total_cost  # noqa: E402
from .optimize import (AnnealParams, SolveResult, anneal, exhaustive_optimal,  # noqa: E402
                       greedy_pack, initial_state, propose_move)

__all__ = [
    "AnnealParams", "BoundingBox", "CostBreakdown", "FixedShapeTrack", "FrameGeometry",
    "SolveResult", "SynopsisConstraints", "SynopsisState", "Topology", "Tube", "anneal",
    "box_overlap_area", "count_collisions", "exhaustive_optimal", "greedy_pack", "initial_state",
    "propose_move", "temporal_cost", "total_cost", "track_to_tube", "tubes_collide",
    "validate_state",
]
