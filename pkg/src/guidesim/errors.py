"""Exception types raised across the library."""


class GuidesimError(Exception):
    """Base class for all library errors."""


class DegenerateInput(GuidesimError):
    """Input geometry carries too little information (collinear, empty, ...)."""


class SceneGenerationError(GuidesimError):
    """No feasible obstacle layout found within the placement budget."""


class BoundaryNotFound(GuidesimError):
    """No rectangle hypothesis passed validation.

    ``best_inlier_count`` reports the strongest hypothesis seen, for diagnostics.
    """

    def __init__(self, message: str, best_inlier_count: int = 0):
        super().__init__(message)
        self.best_inlier_count = best_inlier_count


class PlanningError(GuidesimError):
    """Base class for path planning failures."""


class OutOfBounds(PlanningError):
    pass


class LethalStart(PlanningError):
    pass


class LethalGoal(PlanningError):
    pass


class NoPath(PlanningError):
    pass


class ClusterCollapse(GuidesimError):
    """1D k-means kept producing an empty cluster after all restarts."""


class NoiseBox(GuidesimError):
    """Shelf boxes could not all be assigned to a row.

    ``noise_indices`` lists the offending box indices.
    """

    def __init__(self, message: str, noise_indices: list[int]):
        super().__init__(message)
        self.noise_indices = noise_indices


class TargetMissing(GuidesimError):
    pass


class TargetDuplicated(GuidesimError):
    pass


class EmptyMask(GuidesimError):
    pass


class AmbiguousColour(GuidesimError):
    """Mean hue sits too close to two palette base colours."""


class DuplicateShirt(GuidesimError):
    pass


class RowsNotFound(GuidesimError):
    """Fewer than two point components large enough to be chair rows."""


class DegenerateCorners(GuidesimError):
    pass


class PointAtInfinity(GuidesimError):
    pass


class ScenarioSchemaError(GuidesimError):
    """Scenario document violates the documented schema."""
