"""Gaussian Fourier-Feynman transforms on Wiener space.

Grid calculus, Monte Carlo rotation checks, closed-form and quadrature
transform evaluation on cylinder functionals, and the transform algebra
(q-group, weight monoid, free-group words).
"""

from .grid_core import (
    GridFunction,
    GridMismatchError,
    HSeq,
    TimeGrid,
    beta,
    inner_product,
    norm_l2,
    s_combine,
    s_combine_seq,
    s_equivalent,
    wedge,
)
from .cylinder import (
    BlackBoxF,
    CylinderFunctional,
    FamilyMismatchError,
    GaussPolyFactor,
    OrthogonalFamily,
    ProductGaussPoly,
    a2_dist,
    a2_inner,
    a2_norm,
    cosine_basis,
    eval_cylinder,
    find_O_inf_elements,
    in_O_inf,
    in_O_inf_n,
    s_preserves_O_inf,
)
from .wiener_mc import (
    MCEstimate,
    RngStream,
    WienerPath,
    merge_estimates,
    pwz,
    pwz_series,
    sample_path,
    verify_rotation2,
    verify_rotation_seq,
    z_process,
    zscore,
)
from .transform import (
    KernelDomainError,
    OInfMembershipError,
    QElem,
    QuadratureTransform,
    TransformTag,
    compose_check,
    gauss_kernel_1d,
    gfft,
    gfft_general,
    plancherel_check,
    q_compose,
    t_lambda,
    t_lambda_mc,
)
from .algebra import (
    GroupWord,
    MonoidElem,
    SeqClass,
    TransformClass,
    barwedge,
    monoid_op,
    q_group_laws,
    word_eval,
    word_reduce,
    xi,
    xi_inv,
)

__version__ = "0.1.0"
