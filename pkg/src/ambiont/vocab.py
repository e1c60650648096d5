"""Names of the smart-city vocabulary (prefix ``sc``)."""

from __future__ import annotations

from .kb import EntityId

PREFIX = "sc"
NAMESPACE = "urn:ambiont:smartcity#"


class Namespace:
    """Attribute access yields entity ids: ``SC.Sensor`` is ``sc:Sensor``."""

    def __init__(self, prefix: str):
        self._prefix = prefix

    def __getattr__(self, local: str) -> EntityId:
        if local.startswith("_"):
            raise AttributeError(local)
        return EntityId(self._prefix, local)

    def __call__(self, local: str) -> EntityId:
        return EntityId(self._prefix, local)


SC = Namespace(PREFIX)
