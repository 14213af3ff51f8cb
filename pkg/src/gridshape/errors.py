"""Exception types raised by the gridshape library.

Every error carries enough context to print an actionable message; tuning
errors name the violated bound so callers (CLI, HTTP service) can surface it.
"""

from __future__ import annotations


class GridshapeError(Exception):
    """Base class for all gridshape errors."""

    code = "gridshape_error"


class DisconnectedGraph(GridshapeError):
    """The network graph (lines or override sparsity) is not connected."""

    code = "disconnected_graph"


class NonPositiveWeight(GridshapeError):
    """An edge weight came out non-positive.

    Signals an equilibrium angle difference of 90 degrees or more across a
    line, which puts the operating point outside the linearization's validity.
    """

    code = "non_positive_weight"


class EigensolveFailure(GridshapeError):
    """The symmetric eigensolver failed to converge."""

    code = "eigensolve_failure"


class AlgebraicLoop(GridshapeError):
    """Controller feedthrough makes the closed-loop interconnection singular."""

    code = "algebraic_loop"


class NonFiniteState(GridshapeError):
    """A simulated trajectory overflowed or produced NaNs."""

    code = "non_finite_state"


class NadirConditionViolated(GridshapeError):
    """Virtual-inertia parameters fall below the Nadir-elimination threshold.

    The locus-shape guarantees (and the rate bound) only apply when the
    virtual inertia is at least the critical value for the given droop.
    """

    code = "nadir_condition_violated"

    def __init__(self, m_v: float, m_v_min: float):
        self.m_v = m_v
        self.m_v_min = m_v_min
        super().__init__(
            f"m_v = {m_v:.6g} s is below the Nadir-elimination minimum "
            f"m_v_min = {m_v_min:.6g} s"
        )


class BranchJump(GridshapeError):
    """Root-locus continuation jumped farther than the safety bound.

    Usually means the gain grid is too coarse near a break point.
    """

    code = "branch_jump"


class NotSettled(GridshapeError):
    """The response has not settled enough for an envelope fit."""

    code = "not_settled"


class TuningInfeasible(GridshapeError):
    """Base class for tuning infeasibility; names the violated bound."""

    code = "tuning_infeasible"
    bound_name = "unspecified"

    def __init__(self, message: str, bound_value: float | None = None):
        self.bound_value = bound_value
        super().__init__(message)


class InfeasibleDecayTarget(TuningInfeasible):
    """The decay-rate target exceeds what inverse droop can achieve."""

    code = "infeasible_decay_target"
    bound_name = "decay target"


class CoiDroopExceedsRelaxedBound(TuningInfeasible):
    """The frequency-security droop exceeds the relaxed admissible window."""

    code = "coi_droop_exceeds_relaxed_bound"
    bound_name = "relaxed COI bound"
