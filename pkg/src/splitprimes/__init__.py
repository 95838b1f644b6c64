"""Primes that split completely in torsion fields of elliptic curves."""
from __future__ import annotations

__version__ = "0.1.0"

from .arith import factorize, is_prime, sieve_primes, zeta_constants
from .buchstab import (
    ExponentRegion,
    build_region_U,
    buchstab_integral,
    deficit,
    gamma_width,
    omega,
    omega_upper,
)
from .curves import CurveFp, GroupStructure, count_points, enumerate_d1_values, group_structure
from .torsion import (
    SieveConfig,
    admissible_trace,
    count_Pd,
    d1_set,
    dl_set,
    ds_set,
    dx_count,
    galois_size_proxy,
    p_in_Pd,
    scan_outside,
)
