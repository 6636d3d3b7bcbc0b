"""k-medoids clustering with PAM, FastPAM1/2, LAB, CLARA and CLARANS."""

from .core import (
    AssignmentCache,
    DataError,
    DissimilarityMatrix,
    MedoidState,
    ParseError,
    SwapCandidate,
    SwapRecord,
    apply_swap,
    change,
    compute_td,
    rebuild_cache,
    swap_delta,
)
from .dissimilarity import Metric, VectorDistances, build_matrix, load_matrix, save_matrix
from .initializers import (
    InitConfig,
    build_init,
    initialize,
    kmeanspp_init,
    lab_init,
    parkjun_init,
    random_init,
)
from .kernels import BACKEND
from .sampling import ClaransConfig, ClaraConfig, clara, clarans, fastclara, fastclarans
from .swap import (
    RunStats,
    SwapConfig,
    fastpam1_swap,
    fastpam2_swap,
    pam_swap,
    parkjun_refine,
    refine,
    reynolds_swap,
    swap_gap,
)

__version__ = "0.1.0"
