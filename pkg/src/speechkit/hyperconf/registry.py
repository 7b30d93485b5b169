"""Write-once map from dotted names to constructors."""

from __future__ import annotations

from typing import Any, Callable

from .errors import DuplicateFactoryError

Factory = Callable[[list, dict], Any]


class FactoryRegistry:
    """Stands in for import machinery: ``!new:a.b`` looks up ``"a.b"`` here.

    A factory is called as ``fn(positional_list, keyword_dict)``.
    """

    def __init__(self, factories: dict[str, Factory] | None = None):
        self._factories: dict[str, Factory] = {}
        for key, fn in (factories or {}).items():
            self.register(key, fn)

    def register(self, key: str, fn: Factory) -> None:
        if key in self._factories:
            raise DuplicateFactoryError(f"factory {key!r} is already registered")
        if not callable(fn):
            raise TypeError(f"factory {key!r} is not callable")
        self._factories[key] = fn

    def factory(self, key: str):
        """Decorator form of :meth:`register`."""

        def deco(fn):
            self.register(key, fn)
            return fn

        return deco

    def __contains__(self, key: str) -> bool:
        return key in self._factories

    def __getitem__(self, key: str) -> Factory:
        return self._factories[key]

    def keys(self):
        return self._factories.keys()
