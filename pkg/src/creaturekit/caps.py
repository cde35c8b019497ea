"""Instance-size budgets for the exponential searches.

Defaults can be raised through the ``CREATUREKIT_CAPS`` environment variable,
e.g. ``CREATUREKIT_CAPS="HN_total_dom=30,hn_members=14"``.
"""

from __future__ import annotations

import os
from functools import lru_cache
from dataclasses import dataclass, fields, replace

from .errors import CapExceeded, InvalidInput


@dataclass(frozen=True)
class Caps:
    hn_members: int = 12
    hn_total_dom: int = 40
    HN_total_dom: int = 24
    oracle_HN_total_dom: int = 12
    oracle_pos_product: int = 2**12
    oracle_front_depth: int = 4
    oracle_front_count: int = 2_000_000
    val_extensional_product: int = 2**16
    fc_search_nodes: int = 20_000


def load_caps(env: str | None = None) -> Caps:
    raw = os.environ.get("CREATUREKIT_CAPS", "") if env is None else env
    return _parse(raw)


@lru_cache(maxsize=32)
def _parse(raw: str) -> Caps:
    caps = Caps()
    if not raw.strip():
        return caps
    names = {f.name for f in fields(Caps)}
    updates = {}
    for part in raw.split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        key = key.strip()
        if key not in names:
            raise InvalidInput(f"unknown cap {key!r} in CREATUREKIT_CAPS")
        try:
            updates[key] = int(value)
        except ValueError:
            raise InvalidInput(f"cap {key!r} needs an integer value") from None
    return replace(caps, **updates)


def check(value: int, limit: int, what: str) -> None:
    if value > limit:
        raise CapExceeded(f"{what} = {value} exceeds cap {limit} (raise via CREATUREKIT_CAPS)")
