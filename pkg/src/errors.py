"""
Exception hierarchy for the processor simulator.
Each error knows the exit code the CLI reports for it.
"""


class ProcessorError(Exception):
    """Base class for every error raised by the simulator."""

    exit_code = 1


class SchemaError(ProcessorError):
    """Malformed input file, unknown kind, or violated precondition."""

    exit_code = 2


class InvalidInputError(ProcessorError):
    """Mathematically invalid input (non-unitary gate, bad program state, ...)."""

    exit_code = 3


class DimensionMismatch(ProcessorError):
    """Operands whose dimensions do not fit together."""

    exit_code = 4


class VerificationFailure(ProcessorError):
    """A verified identity exceeded the tolerance."""

    exit_code = 5


class OrthogonalityViolation(InvalidInputError):
    """Basis operators do not satisfy sum_j A_jk1^dag A_jk2 = delta I."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"basis operators violate orthogonality: residual {residual:.3e} > {tolerance:.1e}"
        )


class NoUniqueFixedPoint(ProcessorError):
    """The eigenvalue-1 eigenspace of a channel has dimension other than one."""

    def __init__(self, multiplicity: int):
        self.multiplicity = multiplicity
        super().__init__(f"channel has {multiplicity} independent fixed points")
