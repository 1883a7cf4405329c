class GuardExceeded(RuntimeError):
    """An enumeration guard (simplex dimension, selection count) was exceeded."""


class InputError(ValueError):
    """Malformed user input (files, configuration)."""
