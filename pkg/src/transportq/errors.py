"""Exception types shared across the package."""


class TransportqError(Exception):
    """Base class for all errors raised by transportq."""


class DimensionMismatchError(TransportqError, ValueError):
    """Operands or initial data have incompatible dimensions."""


class InvariantViolationError(TransportqError, ValueError):
    """A value failed a structural invariant (shape, finiteness,
    hermiticity, unitarity) at construction time."""


class DomainError(TransportqError, ValueError):
    """A time argument lies outside the generator path's domain, or a
    step/grid parameter is invalid."""


class NumericalError(TransportqError, RuntimeError):
    """A computation produced results beyond its guaranteed tolerance
    (e.g. accumulated unitarity defect above threshold)."""


class ScenarioError(TransportqError, RuntimeError):
    """A scenario run failed; the message names the failing stage."""


class ConfigError(TransportqError, ValueError):
    """A configuration document failed validation.

    ``location`` is a dotted/indexed path into the document, e.g.
    ``hamiltonian.matrix[1][0]``.
    """

    def __init__(self, location, message):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)
