"""Tweet corpus processing: tokenization, token classing, vocabularies.

Input corpora are plain text, one tweet per line, UTF-8. Tokens fall into
four classes (numeral, emoji, emoticon, word); the class drives how the
synthetic bilingual dictionaries are filtered later on.
"""

import re
import unicodedata
import warnings
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

from .emoji_data import (
    EMOJI_CLUSTER_PATTERN,
    EMOTICON_PATTERN,
    EMOTICON_SET,
    is_emoji_token,
)


class TokenClass(Enum):
    NUMERAL = "numeral"
    EMOJI = "emoji"
    EMOTICON = "emoticon"
    WORD = "word"


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True


DEFAULT_TOKENIZER = TokenizerConfig()

# Alternation order defines precedence: URLs, mentions and hashtags stay
# whole; emoticons beat single punctuation; emoji clusters beat the
# catch-all; numbers beat words so "3.5" stays one token.
_TOKEN_RE = re.compile(
    r"(?P<url>(?:https?://|www\.)\S+)"
    r"|(?P<mention>@\w+)"
    r"|(?P<hashtag>#\w+)"
    rf"|(?P<emoticon>{EMOTICON_PATTERN})"
    rf"|(?P<emoji>{EMOJI_CLUSTER_PATTERN})"
    r"|(?P<number>[0-9]+(?:[.,][0-9]+)?)"
    r"|(?P<word>\w+)"
    r"|(?P<punct>\S)"
)

_CASED_GROUPS = {"url", "mention", "hashtag", "word", "number", "punct"}

_NUMERAL_RE = re.compile(r"[0-9]+(?:[.,][0-9]+)?\Z")


def tokenize(line: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Split one tweet into tokens.

    Emoji grapheme clusters and lexicon emoticons are kept whole and never
    case-folded; URLs, @-mentions and #-hashtags are single tokens; all
    other tokens are NFC-normalized and lowercased when config.lowercase.
    """
    text = unicodedata.normalize("NFC", line)
    out = []
    for m in _TOKEN_RE.finditer(text):
        tok = m.group(0)
        if config.lowercase and m.lastgroup in _CASED_GROUPS:
            tok = tok.lower()
        out.append(tok)
    return out


def classify_token(token: str) -> TokenClass:
    """Assign the token class; precedence numeral > emoji > emoticon > word."""
    if _NUMERAL_RE.match(token):
        return TokenClass.NUMERAL
    if is_emoji_token(token):
        return TokenClass.EMOJI
    if token in EMOTICON_SET:
        return TokenClass.EMOTICON
    return TokenClass.WORD


@dataclass
class Vocabulary:
    """Ordered token list with per-token frequency and class label.

    Row indices of embedding matrices refer to positions in `tokens`.
    Vocabularies built by build_vocabulary are ordered by descending
    frequency with lexicographic tie-breaking; vocabularies read back from
    files keep the file order.
    """

    tokens: list[str]
    freqs: np.ndarray
    classes: list[TokenClass]
    total_tokens: int = 0   # stream total before any min-count cutoff
    n_unique: int = 0       # distinct tokens before the cutoff
    index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not (len(self.tokens) == len(self.freqs) == len(self.classes)):
            raise ValueError("vocabulary fields have mismatched lengths")
        self.freqs = np.asarray(self.freqs, dtype=np.int64)
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")
        if self.total_tokens == 0:
            self.total_tokens = int(self.freqs.sum())
        if self.n_unique == 0:
            self.n_unique = len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index


@dataclass(frozen=True)
class CorpusStats:
    n_tweets: int
    n_duplicates: int
    n_tokens: int
    n_unique: int


def build_vocabulary(tokens: Iterable[str], min_count: int = 5) -> Vocabulary:
    """Count a token stream into a Vocabulary, dropping rare tokens."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    return vocabulary_from_counts(Counter(tokens), min_count)


def vocabulary_from_counts(counts: Counter, min_count: int = 5) -> Vocabulary:
    """Build a Vocabulary from merged counts (shard merging is Counter +)."""
    total = sum(counts.values())
    kept = sorted(
        (t for t, c in counts.items() if c >= min_count),
        key=lambda t: (-counts[t], t),
    )
    if not kept:
        warnings.warn("vocabulary is empty after min-count cutoff")
    return Vocabulary(
        tokens=kept,
        freqs=np.array([counts[t] for t in kept], dtype=np.int64),
        classes=[classify_token(t) for t in kept],
        total_tokens=total,
        n_unique=len(counts),
    )


def iter_corpus_lines(path: str) -> Iterator[str]:
    """Yield raw tweet lines; invalid UTF-8 becomes the replacement char."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        for line in fh:
            yield line.rstrip("\n")


def scan_corpus(
    lines: Iterable[str],
    config: TokenizerConfig = DEFAULT_TOKENIZER,
    min_count: int = 5,
) -> tuple[Vocabulary, CorpusStats]:
    """Deduplicate tweets, tokenize, and count.

    Duplicate tweet lines (exact match after trimming surrounding
    whitespace) are dropped before counting.
    """
    seen = set()
    counts: Counter = Counter()
    n_tweets = 0
    n_duplicates = 0
    n_tokens = 0
    for line in lines:
        key = line.strip()
        if key in seen:
            n_duplicates += 1
            continue
        seen.add(key)
        n_tweets += 1
        toks = tokenize(line, config)
        n_tokens += len(toks)
        counts.update(toks)
    vocab = vocabulary_from_counts(counts, min_count) if counts else Vocabulary(
        tokens=[], freqs=np.zeros(0, dtype=np.int64), classes=[]
    )
    stats = CorpusStats(
        n_tweets=n_tweets,
        n_duplicates=n_duplicates,
        n_tokens=n_tokens,
        n_unique=len(counts),
    )
    return vocab, stats


def write_vocab_tsv(vocab: Vocabulary, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tok, freq, cls in zip(vocab.tokens, vocab.freqs, vocab.classes):
            fh.write(f"{tok}\t{int(freq)}\t{cls.value}\n")


def read_vocab_tsv(path: str) -> Vocabulary:
    """Read a vocabulary TSV (token, count, class), preserving file order."""
    tokens: list[str] = []
    freqs: list[int] = []
    classes: list[TokenClass] = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{path}: line {lineno}: expected 3 tab-separated fields, "
                    f"got {len(parts)}"
                )
            tokens.append(parts[0])
            try:
                freqs.append(int(parts[1]))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: bad count field {parts[1]!r}"
                ) from None
            try:
                classes.append(TokenClass(parts[2]))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: unknown token class {parts[2]!r}"
                ) from None
    return Vocabulary(
        tokens=tokens,
        freqs=np.array(freqs, dtype=np.int64),
        classes=classes,
    )
