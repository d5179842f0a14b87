class DegenerateInputError(ValueError):
    """Point cloud too small or too flat to triangulate."""


class InvariantError(RuntimeError):
    """A structure violates an invariant it was required to satisfy."""


class StageError(RuntimeError):
    """Failure inside a pipeline stage; ``stage`` names where it happened."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
