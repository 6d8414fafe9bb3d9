"""Sampling and inversion of Radon transforms of bandpass functions."""

from .bandpass import BandSpec, BandpassKernel, Parity, RadialSpectrum, eval_kernel, eval_profile, psi
from .bessel import bessel_j, bessel_j_orders
from .errors import (
    BPRadonError,
    GridNotValidated,
    InvalidJitter,
    NoConvergence,
    NonUniformGrid,
    OrderTooLarge,
    QuadratureUnderResolved,
    Singular,
    TooFewPoints,
    ToleranceViolation,
    WrongCount,
)
from .grids import (
    AngularGrid,
    DensityReport,
    RadialGrid,
    Verdict,
    counting_function,
    equispaced_angles,
    make_jittered_grid,
    make_uniform_grid,
    uniform_density_estimate,
    validate_angular_grid,
    validate_radial_grid,
)
from .radon import (
    ImageEval,
    RasterSpec,
    SampleTable,
    SinogramModel,
    counterexample_norms,
    eval_image,
    eval_sinogram,
    image_raster,
    moment_check,
    norm_bound_check,
    random_model,
    sample_sinogram,
    unfold,
)
from .recon import (
    ReconConfig,
    ReconResult,
    angular_solve,
    band_projected_disc,
    eval_reconstruction,
    fbp_baseline,
    radial_lsq,
    reconstruct_image,
    reconstruct_pipeline,
)

__version__ = "0.1.0"
