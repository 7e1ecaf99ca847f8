"""
Exceptions raised by the exdyn engines.
Library code raises these; exdyn.py maps them to exit codes.
"""


class ExdynError(Exception):
    """Base class for every error the engines raise on purpose."""


# =============================================================================
# FINITE ENGINE
# =============================================================================

class SizeMismatch(ExdynError):
    def __init__(self, flow_size, topo_size):
        super().__init__(f"flow has {flow_size} points but topology has {topo_size}")
        self.flow_size = flow_size
        self.topo_size = topo_size


class InvalidFlow(ExdynError):
    pass


class InvalidTopology(ExdynError):
    pass


class InvalidExternology(ExdynError):
    pass


class NotContinuous(ExdynError):
    """phi^1 breaks the specialization preorder at the pair (x, y)."""

    def __init__(self, x, y):
        super().__init__(f"map is not continuous: {x} is in min_open[{y}] but its image leaves min_open of the image of {y}")
        self.x = x
        self.y = y


class SizeCapExceeded(ExdynError):
    def __init__(self, size, cap):
        super().__init__(f"space of size {size} exceeds the brute-force cap {cap}")
        self.size = size
        self.cap = cap


class NotInD(ExdynError):
    def __init__(self, x):
        super().__init__(f"point {x} is not in the region of pseudo-attraction D")
        self.x = x


class NotRepresentable(ExdynError):
    def __init__(self, x):
        super().__init__(f"the tail of {x} does not settle in a single path component")
        self.x = x


class CycleNotInBasin(ExdynError):
    pass


# =============================================================================
# COMPLEX ENGINE
# =============================================================================

class InvalidMapSpec(ExdynError):
    pass


class DegreeCapExceeded(ExdynError):
    def __init__(self, degree, cap):
        super().__init__(f"h^n has degree {degree}, above the cap {cap}")
        self.degree = degree
        self.cap = cap


class PeriodCapExceeded(ExdynError):
    def __init__(self, period, cap):
        super().__init__(f"period {period} is above the configured cap {cap}")
        self.period = period
        self.cap = cap


class RootConvergenceFailure(ExdynError):
    def __init__(self, index, residual):
        super().__init__(f"root {index} did not converge (residual {residual:.3e})")
        self.index = index
        self.residual = residual


class InvalidParams(ExdynError):
    pass


class GridMismatch(ExdynError):
    pass


class CyclePixelOutsideWindow(ExdynError):
    pass


# =============================================================================
# RENDER AND CLI
# =============================================================================

class UnknownLabel(ExdynError):
    def __init__(self, label):
        super().__init__(f"label {label} has no palette entry")
        self.label = label


class RenderIOError(ExdynError):
    pass


class ParseError(ExdynError):
    pass
