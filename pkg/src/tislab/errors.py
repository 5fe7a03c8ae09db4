"""Exception hierarchy shared by every tislab module."""


class TislabError(Exception):
    """Base class for all tislab errors."""


class ParameterError(TislabError, ValueError):
    """A parameter is outside its documented range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionError(ParameterError):
    pass


class DomainError(TislabError, ValueError):
    """A quantity falls outside the domain of a formula (zero denominators, etc.)."""


class PreconditionError(TislabError, ValueError):
    pass


class InfeasibleError(TislabError):
    """No path satisfies the requested constraint."""


class CapacityError(TislabError):
    """Path enumeration would exceed the configured cap."""


class DegenerateError(TislabError):
    """Population dynamics hit an all-zero fitness or benchmark."""

    def __init__(self, message, generation=None):
        self.generation = generation
        if generation is not None:
            message = f"generation {generation}: {message}"
        super().__init__(message)


class ConfigError(TislabError, ValueError):
    """Experiment configuration is invalid; ``path`` is ``section.field``."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class PlotError(TislabError):
    pass


class StorageError(TislabError, OSError):
    """Reading or writing a file failed; ``path`` names the file."""

    def __init__(self, path, message):
        self.path = str(path)
        super().__init__(f"{path}: {message}")
