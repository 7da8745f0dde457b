"""Exception hierarchy shared by all modules."""


class PreconditionError(ValueError):
    """An operation was called outside its domain."""


class AdmissibilityError(PreconditionError):
    """An embedding parameter set violates a required inequality.

    The message carries the violated inequality verbatim so that the CLI
    can report it unchanged.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class VerificationError(RuntimeError):
    """A certified invariant failed beyond its tolerance."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where
