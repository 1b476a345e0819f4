"""Exception hierarchy; the CLI maps each class to an exit code."""


class ErgogapError(Exception):
    exit_code = 1


class SpecError(ErgogapError, ValueError):
    """Bad input: malformed chain file, invalid rates, out-of-range parameter."""

    exit_code = 2


class NonCertifiable(ErgogapError):
    """A tail or limit could not be enclosed within the probe horizon."""

    exit_code = 3


class InvariantViolation(ErgogapError, AssertionError):
    """An internal consistency check failed; indicates a bug."""

    exit_code = 4
