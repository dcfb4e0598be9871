"""Exception types shared across the package."""


class CFError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(CFError, ValueError):
    pass


class UnsupportedShape(CFError, ValueError):
    """Raised when an operation needs intervals or boxes and gets another shape."""


class InvalidCylinder(CFError, ValueError):
    pass


class ThinningFailed(CFError):
    def __init__(self, level: int):
        super().__init__(f"thinned offset set C'_{level} is empty")
        self.level = level


class StructurallyDegenerate(CFError):
    def __init__(self, level: int, tower: int):
        super().__init__(f"tower {tower} receives no copies at level {level} (zero column)")
        self.level = level
        self.tower = tower


class InconclusiveDepth(CFError):
    """The certified interval is too wide to support the requested conclusion."""


class PreconditionFailed(CFError):
    pass
