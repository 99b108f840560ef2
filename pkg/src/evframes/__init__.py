"""evframes: event-camera stream processing.

Turns raw event streams into model-ready frame tensors: speed-adaptive
segmentation (fixed event count), locally normalized time-surface and count
representations, label-consistent augmentation, palm-normalized keypoint
metrics, and a deterministic synthetic scene simulator for verification.
"""

from .events import (
    Event,
    EventStream,
    OutOfBoundsError,
    Polarity,
    SensorGeometry,
    StreamFormatError,
)
from .io import load_stream, write_stream
from .segmentation import (
    ByActivePixels,
    ByCount,
    ByTime,
    Segment,
    TailPolicy,
    Window,
    segment_by_active_pixels,
    segment_by_count,
    segment_by_time,
    slice_time,
    window_before,
)
from .representation import (
    BinningMap,
    Frame,
    bin_coordinates,
    event_count,
    lnec,
    lnecs,
    lnes,
    lnewcs,
    render,
)
from .keypoints import JOINT_NAMES, MIDDLE_MCP, NUM_JOINTS, WRIST, KeypointSet
from .augment import (
    AugmentRanges,
    AugmentSpec,
    apply_geometric,
    noise_mask,
    sample_augment,
    suppress_noise,
    transform_keypoints,
    variable_length_segment,
)
from .simulator import (
    CircularPath,
    LinearPath,
    SceneConfig,
    Shape,
    StaticPath,
    Trajectory,
    add_noise,
    load_scene_config,
    scene_from_dict,
    simulate,
)
from .metrics import (
    CameraTransform,
    PckCurve,
    apply_camera,
    aucp,
    distill_loss,
    palm_length,
    pck_curve,
    pckp,
)
from .formats import (
    ManifestEntry,
    read_evf,
    read_evf_frame,
    read_manifest,
    read_trajectory,
    write_evf,
    write_manifest,
    write_trajectory,
)

__version__ = "0.1.0"
