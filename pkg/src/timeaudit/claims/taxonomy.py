"""Seven-way category scheme for atomic factual claims."""
from __future__ import annotations

from enum import Enum


class ClaimCategory(str, Enum):
    """Category of an atomic claim, grouped by how it can leak.

    Group A claims are temporally verifiable. A1-A3 need a determination
    date looked up before a leakage call can be made. A4 restates the
    target outcome and A5 describes its consequences, so both leak by
    definition. Group B claims (B1 background, B2 definitional) carry no
    temporal anchor and can never leak.
    """

    DISCRETE_EVENT = "A1"
    STATE_MEASUREMENT = "A2"
    PUBLICATION = "A3"
    OUTCOME = "A4"
    CONSEQUENTIAL = "A5"
    BACKGROUND = "B1"
    DEFINITIONAL = "B2"

    @classmethod
    def parse(cls, code: str) -> "ClaimCategory":
        try:
            return cls(code.strip().upper())
        except ValueError:
            raise ValueError(f"unknown claim category: {code!r}") from None

    @property
    def is_always_leaked(self) -> bool:
        return self in (ClaimCategory.OUTCOME, ClaimCategory.CONSEQUENTIAL)

    @property
    def is_never_leaked(self) -> bool:
        return self in (ClaimCategory.BACKGROUND, ClaimCategory.DEFINITIONAL)

    @property
    def needs_search(self) -> bool:
        return self in (
            ClaimCategory.DISCRETE_EVENT,
            ClaimCategory.STATE_MEASUREMENT,
            ClaimCategory.PUBLICATION,
        )

    def __str__(self) -> str:  # serialize as the short code
        return self.value
