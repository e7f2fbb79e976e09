"""Shared registry for the acceptance panel printed after the run."""

RESULTS = []


def record(index: int, name: str, ok: bool, detail: str) -> bool:
    """Remember one criterion outcome; returns ok for inline asserting."""
    RESULTS.append((index, name, bool(ok), detail))
    return bool(ok)
