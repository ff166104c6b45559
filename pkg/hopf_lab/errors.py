class HopfLabError(RuntimeError):
    exit_code = 3


class InvalidArgument(HopfLabError, ValueError):
    exit_code = 2


class NumericalFailure(HopfLabError):
    pass


class DegenerateEigenstructure(NumericalFailure):
    pass


class SingularResolvent(NumericalFailure):
    pass


class TrackingAmbiguity(NumericalFailure):
    pass


class InvalidState(HopfLabError):
    pass


class StiffnessFailure(NumericalFailure):
    pass


class BlowUp(NumericalFailure):
    pass


class NoCycleFound(NumericalFailure):
    pass


class ShootingFailure(NumericalFailure):
    pass


class InvalidCycle(NumericalFailure):
    pass


class NoHopfCandidate(HopfLabError):
    exit_code = 4


class ConfigError(HopfLabError):
    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def exit_code_for(exc):
    """Process exit code for an exception escaping a CLI command."""
    if isinstance(exc, HopfLabError):
        return exc.exit_code
    return 3
