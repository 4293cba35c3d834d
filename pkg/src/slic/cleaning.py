"""SME-informed text cleaning pipeline and bigram extraction.

The pipeline is an ordered list of named passes over raw text. Output is
always a single line of lowercase alphanumeric tokens separated by single
spaces, and cleaning is idempotent: running it on its own output is a
no-op. Token-level filters therefore run after hyphen standardization and
a final stop-phrase sweep runs on the filtered token stream, so no later
pass can resurrect something an earlier pass was meant to remove.
"""
from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import OverlappingRules
from .stopwords import ENGLISH_STOP_WORDS

DEFAULT_PASSES = (
    "sme_substitutions",
    "non_english",
    "copyright_stop_phrases",
    "formulas_emails",
    "formatting",
    "html",
    "non_ascii",
    "lowercase",
    "hyphens",
    "stop_words",
    "numbers",
    "short_words",
    "stop_phrase_tokens",
    "collapse",
)

DEFAULT_STOP_PHRASES = (
    "all rights reserved",
    "this is an open access article",
    "published by elsevier",
    "author manuscript",
)


@dataclass
class CleaningConfig:
    enabled_passes: tuple[str, ...] = DEFAULT_PASSES
    sme_substitutions: tuple[tuple[str, str], ...] = ()
    stop_words: frozenset[str] = ENGLISH_STOP_WORDS
    stop_phrases: tuple[str, ...] = DEFAULT_STOP_PHRASES
    min_word_len: int = 3

    def __post_init__(self):
        if self.min_word_len < 1:
            raise ValueError("min_word_len must be >= 1")


def load_sme_rules(path) -> tuple[tuple[str, str], ...]:
    """Read substitution rules from a two-column TSV (# starts a comment)."""
    rules: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line or line.lstrip().startswith("#"):
                continue
            pattern, _, replacement = line.partition("\t")
            if pattern:
                rules.append((pattern, replacement))
    return tuple(rules)


def apply_sme_substitutions(text: str, rules: Sequence[tuple[str, str]]) -> str:
    """Single-pass, leftmost-longest literal substitution.

    Patterns whose edges are word characters only match on word boundaries.
    Replacements are not re-scanned.
    """
    if not rules:
        return text
    by_pattern: dict[str, str] = {}
    for pattern, replacement in rules:
        if pattern in by_pattern and by_pattern[pattern] != replacement:
            raise OverlappingRules(
                f"pattern {pattern!r} maps to both {by_pattern[pattern]!r} and {replacement!r}"
            )
        by_pattern.setdefault(pattern, replacement)

    def anchored(pattern: str) -> str:
        body = re.escape(pattern)
        if pattern and (pattern[0].isalnum() or pattern[0] == "_"):
            body = r"\b" + body
        if pattern and (pattern[-1].isalnum() or pattern[-1] == "_"):
            body = body + r"\b"
        return body

    # Longest pattern first so the regex alternation is leftmost-longest;
    # list order breaks length ties.
    ordered = sorted(by_pattern, key=lambda p: -len(p))
    combined = re.compile("|".join(f"(?:{anchored(p)})" for p in ordered))

    def lookup(match: re.Match) -> str:
        return by_pattern[match.group(0)]

    return combined.sub(lookup, text)


_ASCII_GOOD = set(string.ascii_letters + string.digits + string.punctuation)
_EMAIL_RE = re.compile(r"\S+@\S+")
_FORMULA_CHARS = set("=^\\{}_$")
_COPYRIGHT_RE = re.compile(r"(?im)(?:©|\(c\)\s*\d{4}|\bcopyright\b).*?$")
_HTML_TAG_RE = re.compile(r"</?[a-zA-Z][^<>]*>")
_HTML_ENTITY_RE = re.compile(r"&[a-zA-Z#0-9]{1,10};")
_DASHES_RE = re.compile(r"[\-‐-―−]+")
# Characters carried through the formatting pass: word chars, whitespace,
# dashes (standardized later), and the <>/& needed by the HTML pass.
_SPECIAL_RE = re.compile(r"[^A-Za-z0-9\s\-‐-―−<>/&]")


def _pass_non_english(text: str, cfg: CleaningConfig) -> str:
    kept = []
    for passage in re.split(r"\n\s*\n", text):
        chars = [c for c in passage if not c.isspace()]
        if chars:
            good = sum(1 for c in chars if c in _ASCII_GOOD)
            if good / len(chars) < 0.8:
                continue
        kept.append(passage)
    return "\n\n".join(kept)


def _pass_copyright_stop_phrases(text: str, cfg: CleaningConfig) -> str:
    text = _COPYRIGHT_RE.sub(" ", text)
    for phrase in cfg.stop_phrases:
        if phrase:
            text = re.sub(re.escape(phrase), " ", text, flags=re.IGNORECASE)
    return text


def _pass_formulas_emails(text: str, cfg: CleaningConfig) -> str:
    # Literal escape markers are spaced first so they cannot glue tokens
    # into false formula hits.
    text = text.replace("\\n", " ").replace("\\r", " ").replace("\\t", " ")
    text = _EMAIL_RE.sub(" ", text)
    tokens = [t for t in text.split() if not (set(t) & _FORMULA_CHARS)]
    return " ".join(tokens)


def _pass_formatting(text: str, cfg: CleaningConfig) -> str:
    text = re.sub(r"[\r\n\t]", " ", text)
    text = re.sub(r"[()\[\]{}]", " ", text)
    text = unicodedata.normalize("NFKD", text)
    text = "".join(c for c in text if not unicodedata.combining(c))
    text = _HTML_ENTITY_RE.sub(" ", text)
    return _SPECIAL_RE.sub(" ", text)


def _pass_html(text: str, cfg: CleaningConfig) -> str:
    # Strip tags, then the specials kept alive only for tag detection.
    text = _HTML_TAG_RE.sub(" ", text)
    return re.sub(r"[<>/&]", " ", text)


def _pass_non_ascii(text: str, cfg: CleaningConfig) -> str:
    return "".join(c if ord(c) < 128 else " " for c in text)


def _pass_lowercase(text: str, cfg: CleaningConfig) -> str:
    return text.lower()


def _pass_hyphens(text: str, cfg: CleaningConfig) -> str:
    return _DASHES_RE.sub(" ", text)


def _pass_stop_words(text: str, cfg: CleaningConfig) -> str:
    return " ".join(t for t in text.split() if t not in cfg.stop_words)


def _pass_numbers(text: str, cfg: CleaningConfig) -> str:
    return " ".join(t for t in text.split() if not t.isdigit())


def _pass_short_words(text: str, cfg: CleaningConfig) -> str:
    return " ".join(t for t in text.split() if len(t) >= cfg.min_word_len)


def _normalized_phrase_tokens(phrase: str, cfg: CleaningConfig) -> tuple[str, ...]:
    tokens = re.sub(r"[^a-z0-9]+", " ", phrase.lower()).split()
    tokens = [t for t in tokens if t not in cfg.stop_words]
    tokens = [t for t in tokens if not t.isdigit()]
    return tuple(t for t in tokens if len(t) >= cfg.min_word_len)


def _pass_stop_phrase_tokens(text: str, cfg: CleaningConfig) -> str:
    tokens = text.split()
    sequences = [s for s in (_normalized_phrase_tokens(p, cfg) for p in cfg.stop_phrases) if s]
    if not sequences or not tokens:
        return " ".join(tokens)
    out: list[str] = []
    i = 0
    while i < len(tokens):
        hit = next(
            (s for s in sequences if tuple(tokens[i : i + len(s)]) == s),
            None,
        )
        if hit:
            i += len(hit)
        else:
            out.append(tokens[i])
            i += 1
    return " ".join(out)


def _pass_collapse(text: str, cfg: CleaningConfig) -> str:
    # Safety net keeping the output alphabet closed under re-cleaning.
    return " ".join(re.sub(r"[^a-z0-9 ]", " ", text).split())


_PASSES = {
    "sme_substitutions": lambda text, cfg: apply_sme_substitutions(text, cfg.sme_substitutions),
    "non_english": _pass_non_english,
    "copyright_stop_phrases": _pass_copyright_stop_phrases,
    "formulas_emails": _pass_formulas_emails,
    "formatting": _pass_formatting,
    "html": _pass_html,
    "non_ascii": _pass_non_ascii,
    "lowercase": _pass_lowercase,
    "hyphens": _pass_hyphens,
    "stop_words": _pass_stop_words,
    "numbers": _pass_numbers,
    "short_words": _pass_short_words,
    "stop_phrase_tokens": _pass_stop_phrase_tokens,
    "collapse": _pass_collapse,
}


def clean_text(raw: str, cfg: Optional[CleaningConfig] = None) -> str:
    """Run the configured cleaning passes in order over one text."""
    cfg = cfg or CleaningConfig()
    text = raw
    for name in cfg.enabled_passes:
        try:
            text = _PASSES[name](text, cfg)
        except KeyError:
            raise ValueError(f"unknown cleaning pass {name!r}") from None
    return text


@dataclass(frozen=True)
class BigramStat:
    terms: tuple[str, str]
    count: int
    doc_frequency: int


def extract_bigrams(corpus, top_n: int) -> list[BigramStat]:
    """Most frequent adjacent token pairs over cleaned documents.

    Bigrams never bridge the title/abstract field boundary. Ordered by
    count descending, ties by the pair's lexicographic order.
    """
    counts: dict[tuple[str, str], int] = {}
    doc_freq: dict[tuple[str, str], int] = {}
    for doc in corpus.documents:
        seen: set[tuple[str, str]] = set()
        for fld in (doc.title, doc.abstract):
            tokens = fld.split()
            for a, b in zip(tokens, tokens[1:]):
                counts[(a, b)] = counts.get((a, b), 0) + 1
                seen.add((a, b))
        for pair in seen:
            doc_freq[pair] = doc_freq.get(pair, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        BigramStat(terms=pair, count=c, doc_frequency=doc_freq[pair])
        for pair, c in ranked[: max(top_n, 0)]
    ]


def clean_corpus(corpus, cfg: Optional[CleaningConfig] = None):
    """Return a copy of the corpus with title and abstract cleaned in place."""
    from dataclasses import replace

    from .corpus import Corpus

    cfg = cfg or CleaningConfig()
    docs = [
        replace(doc, title=clean_text(doc.title, cfg), abstract=clean_text(doc.abstract, cfg))
        for doc in corpus.documents
    ]
    cleaned = Corpus(documents=docs, provenance=list(corpus.provenance))
    return cleaned
