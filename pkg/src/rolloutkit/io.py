"""JSON documents for instances and results.

An instance file looks like ``{"kind": ..., "seed": ..., "params": {...},
"instance": {...}, "meta": {...}}``; the ``instance`` block uses the format
owned by the relevant module.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from . import auction, multidim
from .discrete import FacilityInstance
from .errors import BadParams
from .instances import ToyDP

KINDS = ("assign2d", "assign3d", "assignnd", "facility", "separable3d", "eps-separable3d", "toy-dp")
MULTI_KINDS = ("assign3d", "assignnd", "separable3d", "eps-separable3d")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise BadParams(f"{path}: not valid JSON ({e})") from e


def instance_block(kind: str, obj) -> dict:
    if kind == "assign2d":
        return auction.instance_to_json(obj)
    if kind in MULTI_KINDS:
        return multidim.instance_to_json(obj)
    if kind in ("facility", "toy-dp"):
        return obj.to_json()
    raise BadParams(f"unknown instance kind {kind!r}")


def instance_document(kind: str, obj, seed=None, params=None, meta=None) -> dict:
    doc = {"kind": kind, "seed": seed, "params": dict(params or {}), "instance": instance_block(kind, obj)}
    if meta:
        doc["meta"] = meta
    return doc


def fingerprint(doc: dict) -> str:
    body = json.dumps({"kind": doc["kind"], "instance": doc["instance"]}, sort_keys=True)
    return hashlib.sha256(body.encode()).hexdigest()


def load_instance(doc: dict):
    """Rebuild ``(kind, instance)`` from a document, re-checking embedded metadata."""
    kind = doc.get("kind")
    if kind not in KINDS:
        raise BadParams(f"unknown instance kind {kind!r}")
    block = doc.get("instance")
    if not isinstance(block, dict):
        raise BadParams("document has no instance block")
    try:
        if kind == "assign2d":
            obj = auction.instance_from_json(block)
        elif kind in MULTI_KINDS:
            obj = multidim.instance_from_json(block)
        elif kind == "facility":
            obj = FacilityInstance.from_json(block)
        else:
            obj = ToyDP.from_json(block)
    except (KeyError, TypeError, ValueError) as e:
        raise BadParams(f"malformed {kind} instance: {e}") from e
    meta = doc.get("meta") or {}
    if kind in ("separable3d", "eps-separable3d") and "tables" in meta:
        check_separable(obj, meta["tables"], int(meta.get("eps", 0)))
    return kind, obj


def separable_part(layers: int, tables) -> np.ndarray:
    m = len(tables[0])
    arr = np.zeros((m,) * layers, dtype=np.int64)
    for p, t in enumerate(tables):
        shape = [1] * layers
        shape[p], shape[p + 1] = m, m
        arr = arr + np.asarray(t, dtype=np.int64).reshape(shape)
    return arr


def check_separable(obj, tables, eps: int) -> None:
    dev = np.abs(obj.costs - separable_part(obj.layers, tables))
    if dev.max(initial=0) > eps:
        raise BadParams(f"cost tensor deviates from its separable part by {int(dev.max())} > {eps}")
