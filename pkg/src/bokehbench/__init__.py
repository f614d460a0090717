"""Controllable bokeh rendering and challenge evaluation toolkit."""

from .conditioning import (
    ApertureEmbedding,
    FeatureMap,
    MaskSchedule,
    block_mask,
    bokeh_strength_map,
    coordinate_map,
    film_modulate,
    fourier_encode,
    log_aperture_ratio,
    mask_ratio_at,
    project_embedding,
)
from .dataset import (
    SceneRecord,
    SplitManifest,
    export_ground_truth,
    format_f_number,
    load_manifest,
    make_synthetic_dataset,
    submission_filename,
)
from .inference import (
    DIHEDRAL_GROUP,
    DihedralTransform,
    TileSpec,
    apply_transform,
    apply_transform_depth,
    average_outputs,
    tile_process,
    tta_ensemble,
)
from .kernels import backend_name
from .metrics import (
    SENTINEL_INF,
    MetricReport,
    MosRecord,
    lpips_scores,
    mos_aggregate,
    psnr,
    ssim,
    validate_mos,
)
from .optics import (
    MEDIAN,
    REFERENCE_F_NUMBER,
    CoCMap,
    PsfKernel,
    aperture_diameter_mm,
    coc_map,
    coc_to_radius_px,
    make_psf,
)
from .ranking import (
    LeaderboardRow,
    build_leaderboard,
    emit_leaderboard,
    fidelity_rank,
    perceptual_rank,
)
from .raster import (
    ApertureSetting,
    DepthMap,
    RasterImage,
    linear_to_srgb,
    load_depth,
    load_image,
    median_depth,
    save_depth,
    save_image,
    srgb_to_linear,
)
from .renderer import (
    RADIUS_QUANTUM_PX,
    FocusWeights,
    RenderConfig,
    compose_refinement,
    default_max_radius_px,
    focus_weights_from_coc,
    highlight_boost,
    highlight_unboost,
    render_bokeh,
)
from .scoring import (
    ScoreResult,
    ValidationReport,
    score_submission,
    validate_submission,
    write_score_csv,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]