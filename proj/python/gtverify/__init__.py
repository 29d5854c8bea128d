"""Python bindings for the gtverify verification toolchain core."""

from ._gtv import (
    InputError,
    NumericError,
    autocode,
    check_annotations,
    check_certificate,
    condition_number,
    interconnect_closed_loop,
    is_positive_definite,
    load_fixture_set,
    pump_statespace,
    saturate,
    simulate_csv,
    solve_lmi,
    spectral_radius,
    sym_eig,
    throttle_map,
    varying_entry_census,
)

__all__ = [
    "InputError",
    "NumericError",
    "autocode",
    "check_annotations",
    "check_certificate",
    "condition_number",
    "interconnect_closed_loop",
    "is_positive_definite",
    "load_fixture_set",
    "pump_statespace",
    "saturate",
    "simulate_csv",
    "solve_lmi",
    "spectral_radius",
    "sym_eig",
    "throttle_map",
    "varying_entry_census",
]
