"""Underwater depth dataset pipeline: metrics, uncertainty filtering and
image-formation physics, backed by the C++ core."""

from ._atlantis import (
    PipelineError,
    compute_metrics,
    depth_uncertainty,
    estimate_backscatter,
    inverse_to_metric,
    normalize_inverse_depth,
    recover_scene,
    run_cli,
    run_demo_pipeline,
    seed_schedule,
    synthesize_underwater,
    validity_mask,
    water_type_presets,
    __version__,
)

__all__ = [
    "PipelineError",
    "compute_metrics",
    "depth_uncertainty",
    "estimate_backscatter",
    "inverse_to_metric",
    "normalize_inverse_depth",
    "recover_scene",
    "run_cli",
    "run_demo_pipeline",
    "seed_schedule",
    "synthesize_underwater",
    "validity_mask",
    "water_type_presets",
    "__version__",
]
