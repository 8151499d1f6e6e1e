"""Exception types raised across the package."""


class PajsccError(Exception):
    """Base class for all package errors."""


class InvalidParameter(PajsccError, ValueError):
    pass


class PathUnavailable(PajsccError):
    def __init__(self, path_id, time_s):
        super().__init__(f"path {path_id!r} is not available at t={time_s:.6f}s")
        self.path_id = path_id
        self.time_s = time_s


class InvalidSpec(PajsccError, ValueError):
    pass


class CorruptIndex(PajsccError, ValueError):
    pass


class InvalidRate(PajsccError, ValueError):
    pass


class InvalidMSE(PajsccError, ValueError):
    pass


class Infeasible(PajsccError):
    pass


class NoPaths(PajsccError):
    pass


class ConfigError(PajsccError):
    """Scenario file could not be parsed or failed validation.

    ``problems`` lists every violation found, not just the first one.
    """

    def __init__(self, message, problems=None):
        self.problems = list(problems or [])
        if self.problems:
            message = message + ":\n  - " + "\n  - ".join(self.problems)
        super().__init__(message)
