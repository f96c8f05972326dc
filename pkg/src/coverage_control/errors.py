"""Exception types raised by the library."""


class CoverageError(Exception):
    """Base class for all library errors."""


class DuplicateGenerators(CoverageError):
    pass


class DegenerateTriangle(CoverageError):
    pass


class EmptyRegion(CoverageError):
    pass


class ZeroMass(CoverageError):
    pass


class PartitionMismatch(CoverageError):
    pass


class PropertyViolation(CoverageError):
    """A configuration map broke the monotone-approach properties.

    ``agent`` and ``iteration`` identify where it happened.
    """

    def __init__(self, message, agent=None, iteration=None):
        super().__init__(message)
        self.agent = agent
        self.iteration = iteration


class ControllerContractViolation(CoverageError):
    def __init__(self, message, vehicle=None):
        super().__init__(message)
        self.vehicle = vehicle


class NonTermination(CoverageError):
    pass


class StaleView(CoverageError):
    pass


class FairnessViolation(CoverageError):
    pass


class ParseError(CoverageError):
    def __init__(self, message, line=None, section=None):
        loc = []
        if section is not None:
            loc.append(f"section [{section}]")
        if line is not None:
            loc.append(f"line {line}")
        prefix = f"{', '.join(loc)}: " if loc else ""
        super().__init__(prefix + message)
        self.line = line
        self.section = section


class ValidationError(CoverageError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
