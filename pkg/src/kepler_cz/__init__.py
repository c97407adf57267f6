"""Periodic orbits, Conley-Zehnder indices and Morse-Bott data of the rotating Kepler problem."""

from .catalog import (
    FamilyId,
    OrbitRecord,
    bifurcation_energies,
    catalog,
    circular_energies,
    enumerate_families,
    is_generic,
    resonance_energy,
)
from .core import (
    ANGULAR_L3,
    KEPLER_E,
    ROTATING_H,
    Hamiltonian,
    IntegratorConfig,
    InvariantTriple,
    PhasePoint,
    SphereCotangent,
    flow,
    invariants,
    poisson_bracket,
    variational_flow,
)
from .halfint import HalfInteger
from .index import (
    closed_form_index,
    cz_circular,
    cz_collision,
    indexed_catalog,
    robbin_salamon,
    rs_family,
    rs_index,
)
from .ledger import compare_with_reference, generator_table, mbss_shift, sh_reference
from .numeric_index import numeric_cz

__version__ = "0.1.0"

__all__ = [
    "ANGULAR_L3",
    "KEPLER_E",
    "ROTATING_H",
    "FamilyId",
    "HalfInteger",
    "Hamiltonian",
    "IntegratorConfig",
    "InvariantTriple",
    "OrbitRecord",
    "PhasePoint",
    "SphereCotangent",
    "bifurcation_energies",
    "catalog",
    "circular_energies",
    "closed_form_index",
    "compare_with_reference",
    "cz_circular",
    "cz_collision",
    "enumerate_families",
    "flow",
    "generator_table",
    "indexed_catalog",
    "invariants",
    "is_generic",
    "mbss_shift",
    "numeric_cz",
    "poisson_bracket",
    "resonance_energy",
    "robbin_salamon",
    "rs_family",
    "rs_index",
    "sh_reference",
    "variational_flow",
]
