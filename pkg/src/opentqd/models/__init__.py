"""Closed-form experiments and auxiliary test generators."""

from .base import Variants
from .custom import custom_variants, load_model_file, spec_from_dict
from .deutsch import (
    DeutschParams,
    deutsch_analytic_spectrum,
    deutsch_lindbladian,
    deutsch_variants,
)
from .harness import JordanHarness, default_harness
from .landau_zener import (
    LZParams,
    lz_analytic_spectrum,
    lz_lindbladian,
    lz_variants,
    mean_tan,
    mean_sec,
)

__all__ = [
    "DeutschParams",
    "JordanHarness",
    "LZParams",
    "Variants",
    "custom_variants",
    "default_harness",
    "deutsch_analytic_spectrum",
    "deutsch_lindbladian",
    "deutsch_variants",
    "load_model_file",
    "lz_analytic_spectrum",
    "lz_lindbladian",
    "lz_variants",
    "mean_tan",
    "mean_sec",
    "spec_from_dict",
]
