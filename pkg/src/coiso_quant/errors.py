"""Exception hierarchy shared by the CLI exit-code mapping."""


class CoisoError(Exception):
    exit_code = 1


class SceneError(CoisoError):
    """Invalid scene data; ``errors`` holds addressed messages."""

    exit_code = 2

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class PreconditionError(CoisoError):
    """A hypothesis required by the requested operation does not hold."""

    exit_code = 2


class InconsistencyError(CoisoError):
    """An identity guaranteed by construction failed; always a bug or bad input data."""

    exit_code = 3
