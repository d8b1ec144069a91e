"""Prompt templates shipped as text assets.

Templates use ``{name}`` slots. Rendering substitutes only the slots the
caller provides, so literal JSON braces inside the template text survive
untouched.
"""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_SLOT = re.compile(r"\{([a-zA-Z_][a-zA-Z0-9_]*)\}")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Return the raw text of ``templates/<name>.txt``."""
    path = resources.files(__package__) / "templates" / f"{name}.txt"
    return path.read_text(encoding="utf-8")


def render(template: str, **slots: object) -> str:
    """Fill the provided ``{name}`` slots; every slot given must be used."""
    unused = set(slots)

    def _sub(match: re.Match[str]) -> str:
        key = match.group(1)
        if key in slots:
            unused.discard(key)
            return str(slots[key])
        return match.group(0)

    rendered = _SLOT.sub(_sub, template)
    if unused:
        raise KeyError(f"template has no slot(s): {sorted(unused)}")
    return rendered


def render_template(name: str, **slots: object) -> str:
    return render(load_template(name), **slots)
