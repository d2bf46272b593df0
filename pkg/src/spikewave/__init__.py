"""Self-organizing multi-layer spiking networks driven by traveling activity waves."""

from .analysis import (
    ClusterMap,
    WaveMetrics,
    centroid_displacement,
    classify_regime,
    cluster_map,
    coherence_baseline,
    extract_features,
    pool_histogram,
    pool_sizes,
    pool_spread,
    regime_sweep,
    tuning_curves,
    wave_metrics,
)
from .config import (
    GeometrySpec,
    LayerSpec,
    NetworkConfig,
    NoiseSpec,
    RunParams,
    TaskParams,
    WeightInit,
    config_from_dict,
    config_hash,
    config_to_dict,
    parse_config,
)
from .dynamics import (
    LayerState,
    LifParams,
    detect_spikes_and_reset,
    heaviside_spikes,
    initial_state,
    lif_rhs,
    rk4_step,
)
from .errors import BadMagicError, ConfigError, CountMismatchError, IdxError, InstabilityError, TruncatedError
from .mnist import LabeledDataset, encode_frame, load_mnist_idx, write_idx_images, write_idx_labels
from .network import (
    Network,
    NetworkState,
    build_network,
    init_network_state,
    init_weights,
    network_step,
    noise_drive,
    run,
)
from .plasticity import CompetitionRule, PlasticityParams, k_best, relu, stdp_update, winner_take_all
from .readout import LinearClassifier, evaluate, train_readout
from .record import SimulationRecord
from .streams import InputStream
from .topology import (
    KernelParams,
    LayerGeometry,
    build_adjacency,
    build_spike_input_matrix,
    distance_matrix,
    grid_geometry,
    line_geometry,
    load_geometry_csv,
)

__version__ = "0.1.0"
