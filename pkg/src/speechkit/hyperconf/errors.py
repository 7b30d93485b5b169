"""Exceptions raised while parsing or resolving configuration documents."""

from __future__ import annotations


class ConfigError(ValueError):
    """Base class; the CLI maps every subclass to a domain error."""


class ConfigSyntaxError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None, source: str | None = None):
        self.line, self.column, self.source = line, column, source
        where = source or "<string>"
        if line is not None:
            where += f":{line}:{column}"
        super().__init__(f"{where}: {message}")


class UnknownTagError(ConfigSyntaxError):
    pass


class IncludeError(ConfigError):
    pass


class IncludeCycleError(IncludeError):
    pass


class IncludeDepthError(IncludeError):
    pass


class IncludeNotFoundError(IncludeError):
    pass


class RefExprError(ConfigError):
    pass


class ReferenceCycleError(ConfigError):
    def __init__(self, keys):
        self.keys = tuple(keys)
        super().__init__("reference cycle among keys: " + ", ".join(map(str, self.keys)))


class OverrideError(ConfigError):
    pass


class FactoryError(ConfigError):
    def __init__(self, key_path: str, target: str, cause: BaseException | str):
        self.key_path, self.target = key_path, target
        super().__init__(f"{key_path}: {target}: {cause}")


class DuplicateFactoryError(ConfigError):
    pass
