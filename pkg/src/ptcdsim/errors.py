"""Exception and warning types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid model, scheme or sweep parameters."""


class DegenerateRegimeWarning(UserWarning):
    """A target threshold sits above an SIINR ceiling, so outage cannot vanish."""


class LowEventCountWarning(UserWarning):
    """A Monte Carlo estimate rests on too few outage events to be trusted."""
