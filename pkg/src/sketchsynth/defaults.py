"""Access to the bundled default documents."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from .knowledge import Domain, load_domain


def data_text(relpath: str) -> str:
    node = resources.files("sketchsynth").joinpath("data")
    for part in relpath.split("/"):
        node = node.joinpath(part)
    return node.read_text(encoding="utf-8")


def data_json(relpath: str):
    return json.loads(data_text(relpath))


@lru_cache(maxsize=1)
def default_domain() -> Domain:
    return load_domain(data_json("domain.json"), data_json("lexicon.json"))
