"""EEG visual-imagery decoding with perception-guided network training.

The pipeline: load or synthesize epoched EEG, band-pass and resample it,
min-max scale trials, reverse scaled perception trials against a constant
reference so they can augment imagery training, and compare the two
training regimes with a from-scratch convolutional network under
stratified cross-validation.
"""

from .core import DEFAULT_OCCIPITAL, Dataset, Epoch, Montage, TrialKind, validate_epoch
from .dataio import load_dataset, save_dataset
from .dsp import (
    FilterCoefficients,
    FilterSpec,
    TendencyResult,
    alpha_tendency,
    crop_epoch,
    design_bandpass,
    filter_array,
    filter_epoch,
    resample,
    stationarity_tolerance,
    welch_band_power,
)
from .experiment import (
    ExperimentConfig,
    ExperimentReport,
    TrainingParams,
    kfold_split,
    paired_gain_test,
    run_experiment,
    write_report,
)
from .models import (
    LayerSpec,
    ModelSpec,
    build_compact_net,
    build_model,
    build_proposed_net,
    compact_net_spec,
    proposed_net_spec,
    required_input_length,
    shape_trace,
)
from .synth import SynthConfig, generate_synthetic, synth_montage, verify_tendency
from .topomap import electrode_position, export_topomap
from .transform import (
    NormRecord,
    NormScope,
    Reference,
    Regime,
    ReversalConfig,
    TrainSet,
    assemble_training_set,
    denormalize,
    minmax_normalize,
    normalize_array,
    reverse_array,
    reverse_modify,
)

__version__ = "0.1.0"
