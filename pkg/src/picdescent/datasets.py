"""Loading of the shipped JSON datasets.

Every dataset is one JSON document with a ``kind`` field.  Files live under
``<root>/<kind>s/<name>.json``; the root defaults to the ``data`` directory
inside the package and can be overridden with ``PICDESCENT_DATA``.
"""

import json
import os
from functools import lru_cache
from pathlib import Path

from .errors import DatasetError

ENV_VAR = "PICDESCENT_DATA"
_FOLDERS = {"group": "groups", "gmodule": "modules", "chart": "charts",
            "picard": "picard", "style": "styles"}


def data_root():
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else Path(__file__).with_name("data")


def dataset_path(kind, name):
    return data_root() / _FOLDERS[kind] / f"{name}.json"


def list_datasets(kind):
    folder = data_root() / _FOLDERS[kind]
    return sorted(p.stem for p in folder.glob("*.json")) if folder.is_dir() else []


def load_json(kind, name):
    path = Path(name) if str(name).endswith(".json") else dataset_path(kind, name)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise DatasetError(f"no {kind} dataset at {path}") from exc
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: {exc}") from exc
    if doc.get("kind") != kind:
        raise DatasetError(f"{path}: expected kind {kind!r}, found {doc.get('kind')!r}")
    return doc


@lru_cache(maxsize=None)
def _load_group(root, name):
    from .groupcoh import FiniteMatrixGroup
    doc = load_json("group", name)
    try:
        return FiniteMatrixGroup(doc["modulus"], doc["generators"], name=doc.get("name", name))
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"group {name}: {exc}") from exc


def load_group(name):
    return _load_group(str(data_root()), name)


def load_module(name):
    from .groupcoh import GModule
    doc = load_json("gmodule", name)
    try:
        group = load_group(doc["group"])
        basis = doc["basis"]
        return GModule(group, [int(b["order"]) for b in basis], doc["action"],
                       [b["label"] for b in basis], doc.get("name", name))
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"module {name}: {exc}") from exc
