"""Exception hierarchy shared by all oddform modules."""


class OddFormError(Exception):
    pass


class MalformedSpec(OddFormError):
    pass


class InvalidInvolution(MalformedSpec):
    pass


class InvalidSymmetry(OddFormError):
    pass


class InvalidMu(OddFormError):
    pass


class NonUnitLambda(OddFormError):
    pass


class ContextMismatch(OddFormError):
    pass


class UnsupportedExponent(OddFormError):
    pass


class GeneratorOutsideDeltaMax(OddFormError):
    pass


class NotAnIdeal(OddFormError):
    pass


class GeneratorOutsideOmegaMax(OddFormError):
    pass


class ClosureEscapesOmegaMax(OddFormError):
    pass


class BadIndices(OddFormError):
    pass


class NotInParameter(OddFormError):
    pass


class NotInvertible(OddFormError):
    pass


class NotUnitary(OddFormError):
    pass


class PreconditionViolated(OddFormError):
    def __init__(self, clause, message=""):
        super().__init__(f"{clause}: {message}" if message else clause)
        self.clause = clause


class BudgetExceeded(OddFormError):
    def __init__(self, partial_size, budget):
        super().__init__(f"closure exceeded budget {budget} (partial size {partial_size})")
        self.partial_size = partial_size
        self.budget = budget


class NotClosed(OddFormError):
    pass


class BadArguments(OddFormError):
    pass


class InvalidIndices(BadIndices):
    pass
