"""Process-wide memo registry.

Every hot-path cache in the package (solver query results, knowledge-base
interning, product-update memos, formula extensions) registers itself here so
the harness can reset all of them between independent runs. Caches only ever
change speed, never results.
"""

from __future__ import annotations

from typing import Callable

_clearers: list[Callable[[], None]] = []


def register_cache(clear: Callable[[], None]) -> None:
    """Register a zero-argument callable that empties one cache."""
    _clearers.append(clear)


def register_dict(d: dict) -> dict:
    """Register a plain dict cache; returns it for inline use."""
    register_cache(d.clear)
    return d


def clear_all_caches() -> None:
    """Empty every registered cache (used between independent harness runs)."""
    for clear in _clearers:
        clear()
