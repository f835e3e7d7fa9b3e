"""Fertility, token counts, reductions, and per-language breakdowns.

All counting is exact integer arithmetic; ratios are formed only at the
reporting boundary. A word is a maximal run of non-whitespace characters
(Unicode whitespace), the simplest language-agnostic definition.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .corpus import ConversationSet, RoleFilter, extract_text
from .errors import EmptyText, NoWords
from .tokenizer import TokenizerModel, encode_piece, pretokenize


def count_words(text: str) -> int:
    """Number of maximal non-whitespace runs."""
    return len(text.split())


def token_count(model: TokenizerModel, texts: Iterable[str]) -> int:
    """Total tokens over a corpus.

    Counts distinct pretokenized pieces once and weights by multiplicity;
    identical to summing ``len(encode(model, t))`` text by text.
    """
    pieces: Counter[str] = Counter()
    for text in texts:
        pieces.update(pretokenize(text, model.scheme))
    return sum(mult * len(encode_piece(model, piece)) for piece, mult in pieces.items())


@dataclass(frozen=True)
class FertilityResult:
    n_tokens: int
    n_words: int

    @property
    def fertility(self) -> float:
        return self.n_tokens / self.n_words


@dataclass(frozen=True)
class ReductionResult:
    tokens_base: int
    tokens_opt: int

    @property
    def reduction_pct(self) -> float:
        """Percent fewer tokens than the baseline; negative means an increase."""
        return 100.0 * (1.0 - self.tokens_opt / self.tokens_base)


@dataclass(frozen=True)
class LanguageRow:
    language: str
    conversation_count: int
    reduction_pct: float


def fertility(model: TokenizerModel, texts: Iterable[str]) -> FertilityResult:
    """Tokens per word over the given texts (values closer to 1 are better)."""
    texts = list(texts)
    n_words = sum(count_words(t) for t in texts)
    if n_words == 0:
        raise NoWords("fertility is undefined on text without words")
    return FertilityResult(n_tokens=token_count(model, texts), n_words=n_words)


def reduction(
    base: TokenizerModel, opt: TokenizerModel, texts: Iterable[str]
) -> ReductionResult:
    """Token-count change replacing ``base`` by ``opt`` on the same texts."""
    texts = list(texts)
    tokens_base = token_count(base, texts)
    tokens_opt = token_count(opt, texts)
    if tokens_base == 0 or tokens_opt == 0:
        raise EmptyText("reduction is undefined on empty text")
    return ReductionResult(tokens_base=tokens_base, tokens_opt=tokens_opt)


def language_groups(
    conversations: ConversationSet, threshold: int
) -> list[tuple[str, ConversationSet]]:
    """Languages with strictly more than ``threshold`` conversations, with
    their record subsets, sorted by count descending then tag ascending."""
    by_language: dict[str, list] = {}
    for record in conversations.records:
        by_language.setdefault(record.language, []).append(record)
    kept = [
        (language, records)
        for language, records in by_language.items()
        if len(records) > threshold
    ]
    kept.sort(key=lambda lr: (-len(lr[1]), lr[0]))
    return [
        (language, ConversationSet(records=tuple(records))) for language, records in kept
    ]


def per_language_reduction(
    base: TokenizerModel,
    opt: TokenizerModel,
    test: ConversationSet,
    threshold: int = 1000,
) -> list[LanguageRow]:
    """Reduction per language over the test conversations (both roles),
    restricted to languages with more than ``threshold`` conversations."""
    rows: list[LanguageRow] = []
    for language, subset in language_groups(test, threshold):
        result = reduction(base, opt, extract_text(subset, RoleFilter.BOTH))
        rows.append(
            LanguageRow(
                language=language,
                conversation_count=len(subset),
                reduction_pct=result.reduction_pct,
            )
        )
    return rows
