"""Event-driven tactile sensing: transduction, spike coding, classification.

The pipeline turns raw event-camera pixel events into spike trains on a
49-taxel artificial fingertip, encodes the trains with four coding schemes
(intensive, spatial, temporal, spatiotemporal), and classifies textures
with a KNN over Euclidean or Van Rossum distances.  A contact simulator
provides deterministic synthetic slides for end-to-end validation.
"""

from .classify import (
    ClassificationReport,
    classify_split,
    confusion_matrix,
    knn_classify,
    leave_one_out,
    loocv_from_matrix,
    train_test_split,
)
from .encoding import (
    ENCODER_KINDS,
    EncoderSpec,
    IntensiveCode,
    SpatialCode,
    SpatiotemporalCode,
    TemporalCode,
    encode,
    encode_intensive,
    encode_spatial,
    encode_spatiotemporal,
    encode_temporal,
    kernel_response,
)
from .events import (
    EVENT_DTYPE,
    POLARITY_OFF,
    POLARITY_ON,
    SENSOR_HEIGHT,
    SENSOR_WIDTH,
    TAXEL_COUNT,
    Dataset,
    FormatError,
    ParameterError,
    PixelEvent,
    Sample,
    SpikeTrain,
    TacspikeError,
    TaxelEvent,
    ValidationError,
    make_events,
    read_dataset,
    read_events,
    read_events_csv,
    read_sample,
    validate_events,
    write_dataset,
    write_events,
    write_events_csv,
    write_sample,
)
from .metrics import (
    METRIC_KINDS,
    MetricSpec,
    distance_fn,
    euclidean,
    pairwise_matrix,
    van_rossum_multi,
    van_rossum_single,
)
from .optimize import (
    SurrogateResult,
    SweepResult,
    maximize_surrogate,
    optimize_spatiotemporal,
    sweep_delta_t,
)
from .simulator import (
    SensorModel,
    SlideKinematics,
    TextureSpec,
    child_seed,
    generate_dataset,
    grid_texture_set,
    layout_taxels,
    simulate_slide,
)
from .transduction import (
    ReceptiveField,
    TransducerConfig,
    default_fields,
    filter_noise,
    pool_events,
    transduce,
    update_positions,
)

__version__ = "0.1.0"

__all__ = [
    "EVENT_DTYPE",
    "ENCODER_KINDS",
    "METRIC_KINDS",
    "POLARITY_OFF",
    "POLARITY_ON",
    "SENSOR_HEIGHT",
    "SENSOR_WIDTH",
    "TAXEL_COUNT",
    "ClassificationReport",
    "Dataset",
    "EncoderSpec",
    "FormatError",
    "IntensiveCode",
    "MetricSpec",
    "ParameterError",
    "PixelEvent",
    "ReceptiveField",
    "Sample",
    "SensorModel",
    "SlideKinematics",
    "SpatialCode",
    "SpatiotemporalCode",
    "SpikeTrain",
    "SurrogateResult",
    "SweepResult",
    "TacspikeError",
    "TaxelEvent",
    "TemporalCode",
    "TextureSpec",
    "TransducerConfig",
    "ValidationError",
    "child_seed",
    "classify_split",
    "confusion_matrix",
    "default_fields",
    "distance_fn",
    "encode",
    "encode_intensive",
    "encode_spatial",
    "encode_spatiotemporal",
    "encode_temporal",
    "euclidean",
    "filter_noise",
    "generate_dataset",
    "grid_texture_set",
    "kernel_response",
    "knn_classify",
    "layout_taxels",
    "leave_one_out",
    "loocv_from_matrix",
    "make_events",
    "maximize_surrogate",
    "optimize_spatiotemporal",
    "pairwise_matrix",
    "pool_events",
    "read_dataset",
    "read_events",
    "read_events_csv",
    "read_sample",
    "simulate_slide",
    "sweep_delta_t",
    "train_test_split",
    "transduce",
    "update_positions",
    "validate_events",
    "van_rossum_multi",
    "van_rossum_single",
    "write_dataset",
    "write_events",
    "write_events_csv",
    "write_sample",
]
