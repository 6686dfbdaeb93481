"""Structured errors shared across the package."""


class PreconditionError(ValueError):
    """A documented mathematical precondition was violated.

    Carries a machine-readable payload so the CLI can emit JSON diagnostics
    and exit with the documented status code instead of a traceback.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = dict(details)

    def payload(self):
        return {
            "error": "precondition",
            "message": str(self),
            "details": self.details,
        }
