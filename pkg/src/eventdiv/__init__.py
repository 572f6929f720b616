"""Event-based divergence estimation for ventral landing."""

from .events import (
    EventBatch,
    EventFormatError,
    EventStream,
    EventValidationError,
    SensorGeometry,
    batch_stream,
    load_event_file,
    parse_event_file,
    remove_hot_pixels,
    rescale_events,
    subsample_events,
)
from .geometry import (
    CheiralityError,
    DivergenceSample,
    VelocityInterval,
    continuous_divergence,
    divergence_from_velocity,
    radial_warp,
    velocity_domain,
)
from .contrast import (
    ContrastBound,
    EventImage,
    accumulate_image,
    bound_terms,
    image_contrast,
    rasterize_segment,
    upper_bound_image,
)
from .solver import (
    BnbResult,
    IterationLimitError,
    NoEventsError,
    SolverParams,
    estimate_stream_divergence,
    grid_search_oracle,
    maximise_contrast_bnb,
)
from .simulator import GroundTruth, SimConfig, generate_landing_events, ground_truth_divergence
from .evaluate import EvaluationReport, FlowField, divergence_error, of_to_divergence

__version__ = "0.1.0"
