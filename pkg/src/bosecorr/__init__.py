"""Long-range Bose-Hubbard dynamics on a discrete torus, with a harness
that fits and tracks the constants of ballistic correlation-spread bounds."""

from .config import RunConfig, canonical_json, from_dict, load_config
from .cutoff import (
    CutoffFunction,
    ScaledCutoff,
    VelocityParams,
    combine_cutoffs,
    eval_scaled,
    eval_scaled_prime,
    make_standard_cutoff,
    scaled_weights,
    velocity_params,
    verify_class_membership,
)
from .fock import (
    FockBasis,
    annihilation_op,
    apply_operator,
    basis_dim,
    basis_state,
    creation_op,
    expectation,
    number_op,
    number_restricted,
    transfer_op,
)
from .hopping import HoppingMatrix, beta_of, build_power_law, kappa, moment, zero_hopping
from .lattice import Site, TorusLattice, ball, ball_indices, torus_distance, translate
from .model import (
    ModelSpec,
    PotentialSpec,
    assemble_hamiltonian,
    check_controlled_density,
    check_translation_invariance,
    mott_state,
)
from .observables import (
    CorrelationObservable,
    CorrelationProfile,
    commutator_terms,
    correlation_observable,
    correlation_profile,
    corr_with_ball,
    heisenberg_derivative,
    observable_expectation,
)
from .propagator import (
    EvolutionTrace,
    PropagatorConfig,
    evolve,
    leakage,
    reversibility_check,
    trace_to_csv,
)
from .report import CheckReport, hard_checks_pass
from .runner import RunResult, run
from .verifier import (
    ScalingEntry,
    TheoremCheckConfig,
    check_commutator_decomposition,
    check_differential_inequality_structure,
    check_geometric_property,
    check_particle_transport,
    check_symmetrized_expansion_first_order,
    check_theorem_bound,
    scaling_sweep,
    stability_ratio,
    wraparound_ok,
)

__version__ = "0.1.0"
