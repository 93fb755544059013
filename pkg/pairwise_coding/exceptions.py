"""
Exception hierarchy for the allocator.

Infeasibility of a single pair or a non-exact forest search is reported as a
result value; everything here is raised.
"""


class PairwiseCodingError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(PairwiseCodingError, ValueError):
    """An argument is outside the domain of the operation."""


class DegenerateCorrelationError(PairwiseCodingError):
    """Correlation coefficient reached 1 or the covariance is singular."""


class NoArborescenceError(PairwiseCodingError):
    """Some node cannot be reached from the requested root."""

    def __init__(self, node, root):
        self.node = node
        self.root = root
        super().__init__(f"Node {node} is not reachable from root {root}")


class InfeasibleMatchingError(PairwiseCodingError):
    """No matching covers every node with the edges available."""


class NoStrictMatchingForestError(PairwiseCodingError):
    """The mixed graph has no strict matching forest."""


class InfeasibleAllocationError(PairwiseCodingError):
    """No allocation satisfies the peak power constraint."""


class OracleSizeError(PairwiseCodingError):
    """An exhaustive or convex oracle was asked to run beyond its cap."""


class MalformedScheduleError(InvalidArgumentError):
    """A decode schedule decodes a node twice or uses side information too early."""


class SolverBudgetExceededError(PairwiseCodingError):
    """The time budget ran out before any feasible solution was found."""


class InvalidAllocationError(PairwiseCodingError):
    """An assignment produced by a method failed its validity re-check."""
