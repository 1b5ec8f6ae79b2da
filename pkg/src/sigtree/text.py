"""Tokenization, term weighting, and a self-contained Porter stemmer.

Documents are processed independently: lowercase, split on
non-alphanumeric runs, drop stop words, optionally stem, then weight
each distinct term by 1 + ln(term frequency). No collection-level
statistics are used, so indexing stays single-pass.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Collection, Iterable

from .signatures import TermVector

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str, stopwords: Collection[str] = (), stem: bool = False) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, filter, optionally stem."""
    tokens = _TOKEN_RE.findall(text.lower())
    if stopwords:
        tokens = [t for t in tokens if t not in stopwords]
    if stem:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def term_weights(tokens: Iterable[str], doc_id: str) -> TermVector:
    """Weight each distinct term by 1 + ln(tf)."""
    tf = Counter(tokens)
    return TermVector(doc_id, {t: 1.0 + math.log(c) for t, c in tf.items()})


def load_stopwords(path: str) -> frozenset[str]:
    """One stop word per line; blank lines ignored; lowercased."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


# ---------------------------------------------------------------------------
# Porter stemmer (the classic 1980 suffix-stripping algorithm)
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _cons_flags(stem: str) -> list[bool]:
    # y is a consonant at position 0 or after a vowel
    flags: list[bool] = []
    for i, ch in enumerate(stem):
        if ch in _VOWELS:
            flags.append(False)
        elif ch == "y":
            flags.append(True if i == 0 else not flags[i - 1])
        else:
            flags.append(True)
    return flags


def _measure(stem: str) -> int:
    """Count of vowel-consonant sequences: [C](VC)^m[V]."""
    flags = _cons_flags(stem)
    m = 0
    i = 0
    n = len(flags)
    while i < n and flags[i]:
        i += 1
    while i < n:
        while i < n and not flags[i]:
            i += 1
        if i >= n:
            break
        m += 1
        while i < n and flags[i]:
            i += 1
    return m


def _has_vowel(stem: str) -> bool:
    return not all(_cons_flags(stem))


def _ends_double_consonant(stem: str) -> bool:
    if len(stem) < 2 or stem[-1] != stem[-2]:
        return False
    return _cons_flags(stem)[-1]


def _ends_cvc(stem: str) -> bool:
    # consonant-vowel-consonant where the final consonant is not w, x, or y
    if len(stem) < 3:
        return False
    flags = _cons_flags(stem)
    if not (flags[-3] and not flags[-2] and flags[-1]):
        return False
    return stem[-1] not in "wxy"


def _longest_suffix_rule(word: str, rules: list[tuple[str, str]], min_measure: int) -> str:
    # Longest matching suffix wins; only its condition is tested, with no
    # fallthrough to shorter suffixes.
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is None:
        return word
    stem = word[: len(word) - len(best[0])]
    if _measure(stem) > min_measure:
        return stem + best[1]
    return word


_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]

_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]

_STEP4 = [
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
]


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            return word[:-1]
        return word
    if word.endswith("ed") and _has_vowel(word[:-2]):
        word = word[:-2]
    elif word.endswith("ing") and _has_vowel(word[:-3]):
        word = word[:-3]
    else:
        return word
    # cleanup after a bare -ed/-ing removal
    if word.endswith(("at", "bl", "iz")):
        return word + "e"
    if _ends_double_consonant(word) and word[-1] not in "lsz":
        return word[:-1]
    if _measure(word) == 1 and _ends_cvc(word):
        return word + "e"
    return word


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word[:-1]):
        return word[:-1] + "i"
    return word


def _step4(word: str) -> str:
    best = None
    for suffix in _STEP4:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best)):
            best = suffix
    if best is None:
        return word
    stem = word[: len(word) - len(best)]
    if _measure(stem) <= 1:
        return word
    if best == "ion" and not stem.endswith(("s", "t")):
        return word
    return stem


def _step5a(word: str) -> str:
    if not word.endswith("e"):
        return word
    stem = word[:-1]
    m = _measure(stem)
    if m > 1 or (m == 1 and not _ends_cvc(stem)):
        return stem
    return word


def _step5b(word: str) -> str:
    if word.endswith("l") and _ends_double_consonant(word) and _measure(word) > 1:
        return word[:-1]
    return word


def porter_stem(word: str) -> str:
    """Stem one lowercase word; words of length <= 2 are left unchanged."""
    if len(word) <= 2:
        return word
    word = _step1a(word)
    word = _step1b(word)
    word = _step1c(word)
    word = _longest_suffix_rule(word, _STEP2, 0)
    word = _longest_suffix_rule(word, _STEP3, 0)
    word = _step4(word)
    word = _step5a(word)
    word = _step5b(word)
    return word
