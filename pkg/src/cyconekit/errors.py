"""Exception hierarchy shared by all modules."""


class CyConeError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class ParseError(CyConeError):
    exit_code = 2


class DegenerateCone(CyConeError):
    pass


class NotStronglyConvex(CyConeError):
    pass


class NotGood(CyConeError):
    pass


class NotGorenstein(CyConeError):
    pass


class UnboundedComputation(CyConeError):
    pass


class DegreeCapExceeded(CyConeError):
    pass


class ReebOutsidePolygon(CyConeError):
    pass


class NonConvergence(CyConeError):
    pass


class TargetRational(CyConeError):
    pass


class PrecisionExhausted(CyConeError):
    pass


class SizeCapExceeded(CyConeError):
    pass


class NoDeformation(CyConeError):
    pass


class EmptyApproximants(CyConeError):
    pass


class LPFailure(CyConeError):
    pass


class NonCoprimeWeights(CyConeError):
    exit_code = 2


class MixedWeightGenerator(CyConeError):
    exit_code = 2


class ResourceCapExceeded(CyConeError):
    pass


class NonZeroDimensionalDivisor(CyConeError):
    pass


class NonPositivePairing(CyConeError):
    pass


class IntegratorFailure(CyConeError):
    pass


class NotAGroup(CyConeError):
    pass


class JetOverflow(CyConeError):
    pass


class InfiniteOrder(CyConeError):
    pass


class NotHyperplanePreserving(CyConeError):
    pass


class NotEquivariant(CyConeError):
    pass
