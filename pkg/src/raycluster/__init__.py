"""Ray-cluster contour encoding and contour-connecting reconstruction for text detection.

The hot geometry kernels run under numba when available; set
``RAYCLUSTER_BACKEND=numpy`` to force the pure numpy implementations.
"""
from .annotations import (
    AnnotationRecord,
    MalformedLine,
    ParseResult,
    format_detections,
    format_polygons,
    parse_annotations,
    parse_ctw1500,
    parse_detections,
    parse_icdar2015,
    parse_msra_td500,
    parse_polygons,
)
from .container import load_maps, read_maps, save_maps, stack_maps, to_prediction, write_maps
from .decoder import (
    DecodeConfig,
    DetectionResult,
    PredictionMaps,
    cc_connect,
    decode,
    decode_gt,
    merge_regions,
    piecewise_contour,
    read_cluster,
    select_interval_points,
)
from .encoder import (
    GtMaps,
    InstanceEncoding,
    RayCluster,
    cast_cluster,
    encode_instance,
    generate_gt_maps,
    sample_centers,
)
from .errors import *  # noqa: F401,F403
from .evaluation import EvalReport, combine, greedy_match, match_and_score, roundtrip_fidelity
from .geometry import (
    Point2,
    Polygon,
    is_simple,
    mask_iou,
    point_in_polygon,
    polygon_area,
    rasterize,
    ray_polygon_first_hit,
    shrink_polygon,
    trace_outer_contours,
)
from .kernels import get_backend, use_backend
from .losses import LossConfig, dice_loss, finite_diff_check, ray_loss, total_loss
from .synth import SynthParams, synth_generate

__version__ = "0.1.0"
