"""Multi-radar worker re-identification and personalized exposure engine."""

from .assignment import solve_assignment
from .config import PipelineConfig, config_from_dict, load_config
from .exposure import (
    ExposureRecord,
    IdwField,
    PMSensorReading,
    RigidTransform,
    ZoneField,
    ZoneGrid,
    align_streams,
    exposure,
    idw_estimate,
    to_global,
    zone_field,
)
from .pipeline import Pipeline, RunReport, run_simulated
from .reid import (
    IdentityGraph,
    PersistenceParams,
    SimilarityMatrix,
    build_similarity,
    correlation,
    hungarian,
    mutual_best_filter,
    reactivate,
    reid_f1,
    to_cost,
    update_graph,
)
from .signatures import (
    RDSignature,
    extract_signature,
    median_signature,
    normalize_signature,
    range_bin_of,
)
from .sim import (
    Activity,
    ChirpConfig,
    ClutterSpec,
    PMSensorSpec,
    PointCloudFrame,
    RadarPose,
    RDHeatmap,
    Scene,
    WorkerSpec,
    beat_freq_to_range,
    detect_points,
    ground_truth,
    phase_shift_to_velocity,
    simulate_frame,
)
from .tdscan import (
    ClusterParams,
    DopplerBand,
    TdscanTracker,
    Track,
    UserCluster,
    accumulate_window,
    associate_tracks,
    cluster,
    cluster_count_accuracy,
    doppler_filter,
    prune_tracks,
)
from .viewadapt import (
    AdaptedSignature,
    AnalyticAdapter,
    FidelityReport,
    adapt_analytic,
    estimate_motion_axis,
    fidelity_report,
    l1_mean,
    psnr,
    scale_to_255,
    ssim,
)

__version__ = "0.1.0"
