"""Spectral reconstruction benchmark: metrics, camera simulation and baselines."""

from ._core import (
    CameraResponse,
    FormatError,
    LinearModel,
    SolverError,
    default_css,
    derive_seed,
    fit_linear,
    make_scene,
    mrae,
    physical_consistency,
    project,
    pseudoinverse_estimate,
    read_cube,
    rmse,
    shuffle_patches,
    simulate_real_world,
    ssim,
    weighted_mrae,
    write_cube,
)

__version__ = "0.1.0"
