"""gridshape: analysis and tuning of inverter-based frequency control on
linearized power networks."""

from .errors import (AlgebraicLoop, BranchJump, CoiDroopExceedsRelaxedBound,
                     DisconnectedGraph, EigensolveFailure, GridshapeError,
                     InfeasibleDecayTarget, NadirConditionViolated,
                     NonFiniteState, NonPositiveWeight, NotSettled,
                     TuningInfeasible)
from .netmodel import (Bus, Line, NetworkCase, RepresentativeParams,
                       ScaledSpectrum, build_laplacian, case_from_dict,
                       case_spectrum, load_case, proportional_variant,
                       representative_params, scaled_spectrum)
from .dynamics import (ControllerSpec, RationalTF, StateSpace, StepResponse,
                       controller_tf, full_system_ss, generator_tf,
                       modal_step_response, mode_subsystem, per_bus_specs,
                       steady_state_omega, step_response)
from .locus import (LocusBranch, LocusGeometry, default_gain_grid,
                    fs_locus_geometry, gain_at_point, trace_locus,
                    vi_locus_geometry)
from .stability import (EnvelopeFit, ModeAnalysis, StabilityRegion,
                        analyze_modes, check_alpha_psi, fit_envelope,
                        fs_beats_vi, fs_convergence_rate, fs_min_damping,
                        fs_min_decay, vi_rate_bound)
from .tuning import (Frontier, FrontierPoint, TuningResult, TuningTargets,
                     achievable_frontier, delta_omega_from_mhz,
                     frontier_project, tune_db, tune_db_coi, tune_db_osc,
                     vi_mv_min)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
