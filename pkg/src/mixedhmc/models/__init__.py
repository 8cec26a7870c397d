"""Benchmark target distributions implemented against the ModelSpec interface."""

from .gmm import GmmSpec, GaussianMixture, gmm1d_preset, gmm24_preset
from .blr import (
    BlrVarselSpec,
    BlrDataset,
    BlrVarsel,
    blr_generate,
    blr_dataset_to_csv,
    blr_dataset_from_csv,
)
from .binary import (
    BinaryQuadraticSpec,
    BinaryQuadratic,
    binary_quadratic_enumerate,
    random_binary_quadratic,
)

__all__ = [
    "GmmSpec",
    "GaussianMixture",
    "gmm1d_preset",
    "gmm24_preset",
    "BlrVarselSpec",
    "BlrDataset",
    "BlrVarsel",
    "blr_generate",
    "blr_dataset_to_csv",
    "blr_dataset_from_csv",
    "BinaryQuadraticSpec",
    "BinaryQuadratic",
    "binary_quadratic_enumerate",
    "random_binary_quadratic",
]
