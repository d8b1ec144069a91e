"""Float values that carry degenerate-input flags without losing math."""
from __future__ import annotations


class FlaggedFloat(float):
    """A float with an attached tuple of flag strings.

    Behaves exactly like its value in arithmetic and comparisons; the
    flags record which documented fallback produced it (for example
    ``degenerate_weights`` when attribution mass vanished).
    """

    flags: tuple[str, ...]

    def __new__(cls, value: float, flags: tuple[str, ...] = ()) -> "FlaggedFloat":
        obj = super().__new__(cls, value)
        obj.flags = tuple(flags)
        return obj

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    def __repr__(self) -> str:
        if self.flags:
            return f"FlaggedFloat({float(self)!r}, flags={self.flags!r})"
        return f"FlaggedFloat({float(self)!r})"
