"""Character-to-component lexicon with radical-variant normalization.

A lexicon maps each Chinese character to its ordered component list. The
first component is always the character's radical; the remaining entries
are radical-like components. Radical variants (position- or
simplification-induced alternate glyphs such as 氵 for 水) are folded back
to their original forms on load, so a loaded lexicon only ever stores
normalized components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# Reserved component identifiers. PAD fills component lists shorter than
# the requested length; UNK stands in for characters without an entry.
# Both get ordinary embedding rows and are trained like any component.
PAD_COMPONENT = "<PAD>"
UNK_COMPONENT = "<UNK>"

# Built-in variant-to-original transformations, 24 rows. Kept verbatim as a
# row list (not a dict) because the 衤 key occurs twice; when building the
# lookup table the first mapping wins. Extensible via variant-table files.
VARIANT_ROWS = (
    ("艹", "艸"),  # grass
    ("扌", "手"),  # hand
    ("亻", "人"),  # human
    ("氵", "水"),  # water
    ("刂", "刀"),  # knife
    ("車", "车"),  # vehicle
    ("犾", "犬"),  # dog
    ("攴", "支"),  # hit
    ("灬", "火"),  # fire
    ("纟", "糸"),  # silk
    ("钅", "金"),  # gold
    ("耂", "老"),  # old
    ("麥", "麦"),  # wheat
    ("牛", "牛"),  # cattle
    ("亼", "食"),  # eat
    ("食", "食"),  # eat
    ("衤", "示"),  # memory
    ("忄", "心"),  # heart
    ("囧", "网"),  # nest
    ("王", "玉"),  # jade
    ("讠", "言"),  # speak
    ("衤", "衣"),  # cloth (shadowed by the 衤 -> 示 row above)
    ("月", "肉"),  # body
    ("辵", "走"),  # walk
)


class LexiconError(ValueError):
    """Raised for malformed lexicon or variant-table files."""


def _build_variant_table(rows) -> dict[str, str]:
    table: dict[str, str] = {}
    for variant, original in rows:
        table.setdefault(variant, original)
    return table


BUILTIN_VARIANTS = _build_variant_table(VARIANT_ROWS)


@dataclass(frozen=True)
class ComponentLexicon:
    """Immutable character -> component-list mapping.

    ``entries`` values are non-empty tuples with the radical first.
    ``variant_table`` maps variant components to their original forms;
    every stored component is already a fixed point of that mapping.
    """

    entries: dict[str, tuple[str, ...]]
    variant_table: dict[str, str] = field(default_factory=lambda: dict(BUILTIN_VARIANTS))

    def __post_init__(self):
        for char, comps in self.entries.items():
            if len(char) != 1:
                raise LexiconError(f"lexicon keys must be single characters, got {char!r}")
            if not comps:
                raise LexiconError(f"empty component list for {char!r}")
            for comp in comps:
                if self.normalize(comp) != comp:
                    raise LexiconError(
                        f"unnormalized component {comp!r} stored for {char!r}"
                    )

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, char: str) -> bool:
        return char in self.entries

    def normalize(self, component: str) -> str:
        """Map a variant component to its original form (identity otherwise)."""
        return self.variant_table.get(component, component)

    def components_of(self, char: str, m: int) -> tuple[str, ...]:
        """First ``m`` components of ``char``, radical first.

        Shorter lists are padded with PAD; unknown characters yield UNK in
        the radical slot. Always returns exactly ``m`` identifiers.
        """
        if m < 1:
            raise ValueError(f"m must be >= 1, got {m}")
        comps = self.entries.get(char)
        if comps is None:
            comps = (UNK_COMPONENT,)
        comps = comps[:m]
        return comps + (PAD_COMPONENT,) * (m - len(comps))

    def component_inventory(self) -> set[str]:
        """Every distinct component stored in the lexicon."""
        inventory: set[str] = set()
        for comps in self.entries.values():
            inventory.update(comps)
        return inventory

    def length_histogram(self) -> dict[int, int]:
        """Component-list length -> number of characters with that length."""
        hist: dict[int, int] = {}
        for comps in self.entries.values():
            hist[len(comps)] = hist.get(len(comps), 0) + 1
        return dict(sorted(hist.items()))

    @classmethod
    def build(cls, raw_entries, variant_table=None) -> "ComponentLexicon":
        """Construct from possibly unnormalized component lists."""
        table = dict(BUILTIN_VARIANTS) if variant_table is None else dict(variant_table)
        entries = {
            char: tuple(table.get(c, c) for c in comps)
            for char, comps in raw_entries.items()
        }
        return cls(entries=entries, variant_table=table)


def normalize_variant(component: str, lexicon: ComponentLexicon) -> str:
    """Map ``component`` through the lexicon's variant table (identity otherwise)."""
    if not component:
        raise ValueError("component must be a non-empty string")
    return lexicon.normalize(component)


def components_of(char: str, m: int, lexicon: ComponentLexicon) -> tuple[str, ...]:
    """First ``m`` components of ``char``, padded/fallback per the lexicon rules."""
    return lexicon.components_of(char, m)


def load_variant_table(path) -> dict[str, str]:
    """Read a variant-table file: one ``<variant> <original>`` pair per line.

    File pairs extend the built-in table; on duplicate keys the first
    mapping encountered (built-in first, then file order) wins.
    """
    table = dict(BUILTIN_VARIANTS)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            if len(fields) != 2:
                raise LexiconError(
                    f"{path}:{lineno}: expected '<variant> <original>', got {line.rstrip()!r}"
                )
            table.setdefault(fields[0], fields[1])
    return table


def load_lexicon(path, variant_table=None) -> ComponentLexicon:
    """Load a lexicon file: one ``<char> <radical> [<component> ...]`` per line.

    ``#`` starts a comment. Components are normalized through the variant
    table; the file's radical stays first in each list. Raises
    :class:`LexiconError` on parse problems, duplicate characters, or an
    empty file.
    """
    table = dict(BUILTIN_VARIANTS) if variant_table is None else dict(variant_table)
    entries: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split("#", 1)[0].split()
            if not fields:
                continue
            if len(fields) < 2:
                raise LexiconError(
                    f"{path}:{lineno}: expected '<char> <radical> [<component> ...]', "
                    f"got {line.rstrip()!r}"
                )
            char = fields[0]
            if len(char) != 1:
                raise LexiconError(f"{path}:{lineno}: {char!r} is not a single character")
            if char in entries:
                raise LexiconError(f"{path}:{lineno}: duplicate entry for {char!r}")
            entries[char] = tuple(table.get(c, c) for c in fields[1:])
    if not entries:
        raise LexiconError(f"{path}: lexicon file contains no entries")
    return ComponentLexicon(entries=entries, variant_table=table)
