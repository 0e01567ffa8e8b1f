"""Exception hierarchy. Every error carries a stable ``code`` used in CLI reports."""


class KatetovError(Exception):
    code = "error"

    def __init__(self, message="", **witness):
        super().__init__(message or self.code)
        self.witness = witness

    def to_dict(self):
        return {"code": self.code, "message": str(self), "witness": self.witness}


# metric spaces
class MetricError(KatetovError):
    code = "metric_error"


class NotSquare(MetricError):
    code = "not_square"


class Asymmetric(MetricError):
    code = "asymmetric"


class NegativeDistance(MetricError):
    code = "negative_distance"


class NonzeroDiagonal(MetricError):
    code = "nonzero_diagonal"


class TriangleViolation(MetricError):
    code = "triangle_violation"


class ZeroDistanceDistinctPoints(MetricError):
    code = "zero_distance_distinct_points"


class EmptySubset(KatetovError):
    code = "empty_subset"


class UnknownPoint(KatetovError):
    code = "unknown_point"


class DuplicatePointId(KatetovError):
    code = "duplicate_point_id"


class ParseError(KatetovError):
    code = "parse_error"


# Katetov functions
class LengthMismatch(KatetovError):
    code = "length_mismatch"


class NotKatetov(KatetovError):
    code = "not_katetov"


class NotKatetovOnA(NotKatetov):
    code = "not_katetov_on_a"


class SpaceMismatch(KatetovError):
    code = "space_mismatch"


class CapTooSmall(KatetovError):
    code = "cap_too_small"


# approximants
class GridOverflow(KatetovError):
    code = "grid_overflow"


class SizeBudgetExceeded(KatetovError):
    code = "size_budget_exceeded"


# groups
class SearchBudgetExceeded(KatetovError):
    code = "search_budget_exceeded"


class GroupMismatch(KatetovError):
    code = "group_mismatch"


class NotAGroup(KatetovError):
    code = "not_a_group"


# probes
class DegenerateTargets(KatetovError):
    code = "degenerate_targets"


class NoAdmissibleGamma(KatetovError):
    code = "no_admissible_gamma"


class ContainmentFailure(KatetovError):
    code = "containment_failure"


class NotUniformlyDiscrete(KatetovError):
    code = "not_uniformly_discrete"


class EmptyComplement(KatetovError):
    code = "empty_complement"


class SparseComplement(KatetovError):
    """Some point near ``Ax`` is farther than ``2*eps`` from the complement."""

    code = "sparse_complement"


class EmptyBasis(KatetovError):
    code = "empty_basis"


class NoSmallEnoughW(KatetovError):
    code = "no_small_enough_w"


class PremiseFails(KatetovError):
    code = "premise_fails"
