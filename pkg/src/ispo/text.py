"""String normalization and language heuristics.

Terms arrive from sources with inconsistent casing, spacing and Unicode
forms ("Ｃｏｕｇｈ", "咳 嗽", "DRY  COUGH"). All matching in the toolkit
(synonym rings, corpus lookups, rule tables) happens on the normalized
form produced by :func:`normalize`.
"""

import unicodedata

# Han ideographs plus CJK punctuation; enough to classify clinical terms.
_CJK_RANGES = (
    (0x2E80, 0x2EFF),    # radicals
    (0x3000, 0x303F),    # CJK punctuation
    (0x3400, 0x4DBF),    # ideograph extension A
    (0x4E00, 0x9FFF),    # unified ideographs
    (0xF900, 0xFAFF),    # compatibility ideographs
    (0x20000, 0x2A6DF),  # extension B
)

LANGUAGES = ("zh", "en")


def _is_cjk_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def is_cjk_only(s: str) -> bool:
    """True when every non-whitespace character is CJK."""
    chars = [c for c in s if not c.isspace()]
    return bool(chars) and all(_is_cjk_char(c) for c in chars)


def normalize(s: str) -> str:
    """Canonical form of a term string.

    NFKC, trimmed, internal whitespace runs collapsed (removed entirely
    for CJK-only strings, single space otherwise), lowercased. Chinese
    has no case so lowering only affects cased scripts.
    """
    s = unicodedata.normalize("NFKC", s).strip()
    parts = s.split()
    joiner = "" if is_cjk_only(s) else " "
    return joiner.join(parts).lower()


def detect_language(s: str) -> str:
    """zh if the string contains any CJK ideograph, en otherwise."""
    return "zh" if any(_is_cjk_char(c) for c in s) else "en"
