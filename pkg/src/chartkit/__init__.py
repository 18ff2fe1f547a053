"""Channel charting: phase-insensitive channel distances, Isomap charts, quality metrics."""

from ._kernels import BACKEND
from .channels import (
    ChannelDataset,
    ChannelVector,
    Chart,
    DistanceMatrix,
    import_csv,
    import_csv_file,
    load_dataset,
    read_dataset,
    save_dataset,
    write_dataset,
)
from .distances import (
    build_distance_matrix,
    dist_euclidean,
    dist_normalized,
    dist_phase_insensitive,
    dist_phase_insensitive_variational,
    optimal_phase,
)
from .errors import (
    ChartkitError,
    ConnectivityError,
    ConvergenceError,
    DomainError,
    FormatError,
    InvariantError,
    StageError,
)
from .isomap import (
    EmbeddingResult,
    NeighborhoodGraph,
    chart_channels,
    classical_mds,
    ensure_connected,
    geodesic_distances,
    knn_graph,
)
from .metrics import continuity, pca_baseline, quality_curves, rank_table, trustworthiness
from .synth import (
    PRESETS,
    ArrayGeometry,
    ScenarioConfig,
    frequency_grid,
    frequency_vector,
    generate_scenario,
    steering_vector,
)

__version__ = "0.1.0"
