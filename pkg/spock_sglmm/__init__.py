from spock_sglmm import version

from spock_sglmm.diagnostics import (
    DiagnosticReport,
    canonical_correlations,
    diagnose,
    permutation_test,
    wilks_test,
)
from spock_sglmm.geometry import (
    CentroidSet,
    DesignMatrix,
    ProjectionOperator,
    build_projector,
    orthogonal_complement,
    project_centroids,
    trend_covariate,
)
from spock_sglmm.graph import (
    NeighborhoodGraph,
    ReconstructionScore,
    connected_components,
    delaunay_reconstruct,
    edge_direction_alignment,
    knn_reconstruct,
    mean_reconstruction_score,
    score_reconstruction,
)
from spock_sglmm.io import Dataset, load_dataset, load_map
from spock_sglmm.maps import AreaMap, lattice_map
from spock_sglmm.models import (
    McmcConfig,
    ModelFit,
    ModelSpec,
    PriorConfig,
    fit_hh,
    fit_icar,
    fit_lm,
    fit_model,
    fit_rhz,
    fit_spock,
    posterior_summary,
)
from spock_sglmm.precisions import (
    IcarFamily,
    LerouxFamily,
    ProperCarFamily,
    SparseCholesky,
    SparsePrecision,
    icar_precision,
    leroux_precision,
    moran_basis,
    proper_car_precision,
)
from spock_sglmm.simulation import ScenarioConfig, run_study


__copyright__ = "2020, spock_sglmm contributors"
__license__ = "MIT; see LICENSE.rst"
__version__ = version.version
