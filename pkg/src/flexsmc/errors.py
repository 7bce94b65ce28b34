"""Exception hierarchy shared by the modelling, synthesis and simulation layers."""


class FlexSMCError(Exception):
    """Base class for all library errors."""


class RootSearchExhausted(FlexSMCError):
    pass


class DegenerateNullspace(FlexSMCError):
    pass


class SingularMass(FlexSMCError):
    pass


class DimensionMismatch(FlexSMCError, ValueError):
    pass


class SingularGammaB(FlexSMCError):
    pass


class SynthesisError(FlexSMCError):
    """Observer synthesis failed; the CLI maps every subclass to exit code 2."""


class SpectraOverlap(SynthesisError):
    pass


class Unrealizable(SynthesisError):
    pass


class CompositeUnstable(SynthesisError):
    pass


class SimulationError(FlexSMCError):
    """Simulation failure; mapped to exit code 3 by the CLI."""


class Divergence(SimulationError):
    pass


class StepTooLarge(SimulationError, ValueError):
    pass


class NeverReached(FlexSMCError):
    pass


class ConfigError(FlexSMCError):
    """Configuration could not be loaded; mapped to exit code 1."""


class ConfigSyntax(ConfigError):
    pass


class ConfigSemantic(ConfigError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
