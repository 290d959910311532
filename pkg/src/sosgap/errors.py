class SchemaError(ValueError):
    """Input document does not match the expected file format."""


class ParameterError(ValueError):
    """A generation or verification parameterization is rejected."""


class BudgetExceeded(RuntimeError):
    """A configured size budget (table, closure, enumeration) was exceeded."""


class ClosureOverflow(BudgetExceeded):
    """Closure grew past its size budget; the instance is likely not nice enough."""


class NormalizationError(RuntimeError):
    """A local distribution failed to sum to one."""


class PreconditionError(ValueError):
    """An operation's stated precondition does not hold for the given inputs."""
