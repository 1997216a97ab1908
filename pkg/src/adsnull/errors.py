"""Exception hierarchy shared by all modules."""


class AdsNullError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class InvalidInput(AdsNullError):
    exit_code = 2


class NumericalFailure(AdsNullError):
    exit_code = 3


class PoleProximity(InvalidInput):
    """Argument lies within the pole-exclusion radius of a lattice point."""


class ModulusOutOfRange(InvalidInput):
    pass


class NoFiniteSolution(InvalidInput):
    pass


class NonConvergence(NumericalFailure):
    pass


class OutOfDomain(InvalidInput):
    pass


class ClassificationError(InvalidInput):
    pass


class InfiniteW(InvalidInput):
    pass


class DoubleRootSingularity(InvalidInput):
    pass


class BranchPointProximity(InvalidInput):
    """h(s) reaches m/3 +- 1 somewhere on the requested path."""


class StepSizeUnderflow(NumericalFailure):
    pass


class GridTooCoarse(InvalidInput):
    pass


class ParamOutOfRange(InvalidInput):
    pass


class NotInW(InvalidInput):
    pass


class StencilLeavesW(InvalidInput):
    pass


class NoSeed(InvalidInput):
    pass


class NewtonDivergence(NumericalFailure):
    pass
