"""eegattr: attribution methods, quality metrics and visual reports for
compact EEG CNNs."""

from ._kernels import active_backend, compiled_available, set_backend
from .attribution import (
    METHOD_KINDS,
    ChannelContributionMap,
    ContributionMap,
    MethodSpec,
    attribute,
    attribute_batch,
    channel_contribution,
    random_baseline_map,
)
from .engine import ForwardTrace, backward, backward_batch, finite_diff_gradient, forward, forward_batch
from .errors import (
    ChecksumError,
    ConfigError,
    EegattrError,
    FormatError,
    NonFiniteError,
    ShapeError,
    TrainingDivergedError,
    VersionError,
)
from .evaluation import (
    DeletionCurve,
    EvalSummary,
    SampleResult,
    SensitivityResult,
    aggregate,
    channel_deletion_curve,
    channel_sensitivity,
    deletion_curve,
    evaluate_sample,
    patch_sensitivity,
    patch_sensitivity_many,
    pearson,
)
from .models import build_eegnet, build_interpretable_cnn, compute_batch_stats, predict
from .network import BackwardRule, BatchStats, Layer, NetworkSpec, make_network
from .pipeline import PipelineConfig, ProcessedMaps, apply_threshold, normalize, process, smooth
from .render import color_hex, render_sample_view, render_topomap
from .report import Report, generate_report
from .synth import (
    ClassSpec,
    Dataset,
    EEGSample,
    FeatureSpec,
    demo_classes,
    generate_dataset,
    split_leave_one_subject_out,
)
from .dataset_io import (
    ElectrodeLayout,
    MapsFile,
    default_layout,
    load_contribution_maps,
    load_dataset,
    load_layout,
    save_contribution_maps,
    save_dataset,
)
from .training import TrainConfig, train
from .weights_io import load_weights, save_weights

__version__ = "0.1.0"
