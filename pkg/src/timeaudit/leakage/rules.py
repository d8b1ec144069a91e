"""Category shortcuts that settle leakage without any lookup."""
from __future__ import annotations

from typing import Optional

from timeaudit.claims.taxonomy import ClaimCategory


def categorical_leakage(category: ClaimCategory) -> Optional[bool]:
    """True/False when the category alone decides; None when a
    determination date is needed (A1-A3)."""
    if category.is_always_leaked:
        return True
    if category.is_never_leaked:
        return False
    return None
