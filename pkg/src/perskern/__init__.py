"""Persistence diagrams, diagram kernels with variably scaled wrappers, and
kernel-SVM classification experiments on point-cloud data."""

from .diagram import (
    PersistenceDiagram,
    bottleneck_distance,
    persistence,
    sliced_wasserstein_distance,
    wasserstein_distance,
)
from .geometry import (
    OrbitParams,
    as_point_cloud,
    enclosing_radius,
    hausdorff_distance,
    linked_twisted_orbit,
    pairwise_distances,
)
from .kernels import (
    GramMatrix,
    PssKernel,
    PwgKernel,
    SwKernel,
    gram_matrix,
    induced_distance,
    median_heuristic,
    pss_kernel,
    pwg_embedding_inner,
    pwg_kernel,
    sw_kernel,
)
from .oracle import betti_number_oracle
from .persistence import (
    FiltrationSizeError,
    PersistencePair,
    RipsFiltration,
    betti_from_pairs,
    build_rips_filtration,
    compute_persistence,
    diagrams_from_pairs,
    rips_pairs,
)
from .scaling import (
    ScaledKernel,
    ScalingSpec,
    apply_scaling,
    centre_of_persistence,
    centre_of_uniform_mass,
    scaled_kernel,
    top_persistent,
)
from .svm import (
    CvReport,
    OneVsRestSvm,
    TrainedBinarySvm,
    cross_validate,
    predict_ovr,
    scores,
    stratified_folds,
    stratified_split,
    train_binary,
    train_ovr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
