"""BPE training: an incremental optimized trainer and a naive reference oracle.

Both trainers implement the same contract and must produce identical merge
lists on any corpus:

* count adjacent symbol pairs across pretokenized pieces, weighted by piece
  frequency ("aaa" contributes (a,a) twice);
* repeatedly merge the most frequent eligible pair, breaking frequency ties
  by lexicographically smallest (left, right); a pair is ineligible when its
  concatenation already names a vocabulary entry (including the reserved
  byte-fallback literals), so every merge adds exactly one token;
* stop when the vocabulary reaches the target size or the best frequency
  drops below ``min_pair_frequency``.

Selection depends only on (frequency, pair), so the result is independent of
iteration order and identical across runs and platforms.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, CorpusTooLarge
from .tokenizer import (
    N_BYTE_SYMBOLS,
    PretokenScheme,
    TokenizerMode,
    TokenizerModel,
    _base_symbols,
    base_alphabet,
    is_reserved_token,
    merge_adjacent,
    pretokenize,
)

ORACLE_GUARD_BYTES = 1 << 20  # 1 MiB

Pair = tuple[str, str]


@dataclass(frozen=True)
class TrainConfig:
    vocab_size: int
    mode: TokenizerMode = TokenizerMode.BYTE_LEVEL
    scheme: PretokenScheme = PretokenScheme.CATEGORY_SPLIT
    min_pair_frequency: int = 2

    def __post_init__(self):
        if self.vocab_size < N_BYTE_SYMBOLS:
            raise ConfigError(
                f"vocab_size {self.vocab_size} is below the base alphabet size {N_BYTE_SYMBOLS}"
            )
        if self.min_pair_frequency < 1:
            raise ConfigError("min_pair_frequency must be at least 1")


@dataclass(frozen=True)
class PairCount:
    pair: Pair
    frequency: int


def count_pairs(pieces: Mapping[Sequence[str], int]) -> list[PairCount]:
    """Adjacent-pair frequencies over a multiset of symbol sequences.

    Every adjacent index pair counts, weighted by the sequence multiplicity.
    Returned sorted by descending frequency, then ascending pair.
    """
    counts: Counter[Pair] = Counter()
    for seq, mult in pieces.items():
        for a, b in zip(seq, seq[1:]):
            counts[(a, b)] += mult
    return [
        PairCount(pair=pair, frequency=freq)
        for pair, freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]


# ---------------------------------------------------------------------------
# Shared setup
# ---------------------------------------------------------------------------

def _piece_table(corpus: Iterable[str], scheme: PretokenScheme) -> Counter[str]:
    table: Counter[str] = Counter()
    for text in corpus:
        table.update(pretokenize(text, scheme))
    return table


def _initial_state(
    corpus: Iterable[str], config: TrainConfig
) -> tuple[list[str], list[tuple[list[str], int]]]:
    """Base vocabulary plus (symbols, multiplicity) work list for training."""
    pieces = _piece_table(corpus, config.scheme)
    vocab = list(base_alphabet(config.mode))
    if config.mode is TokenizerMode.CHAR_LEVEL_FALLBACK:
        chars: set[str] = set()
        for piece in pieces:
            chars.update(piece)
        vocab.extend(sorted(chars))
        if len(vocab) > config.vocab_size:
            raise ConfigError(
                f"vocab_size {config.vocab_size} is below the base alphabet size "
                f"{len(vocab)} (256 fallback tokens + {len(chars)} corpus characters)"
            )
    probe = TokenizerModel(
        mode=config.mode, scheme=config.scheme, vocab=tuple(vocab), merges=()
    )
    sequences = [
        (symbols, mult)
        for piece, mult in pieces.items()
        if len(symbols := _base_symbols(probe, piece)) > 1
    ]
    return vocab, sequences


def _eligible(product: str, mode: TokenizerMode, vocab_set: set[str]) -> bool:
    # A merged token may not collide with an existing vocabulary entry (the
    # other route to the same string already exists) or with a reserved
    # byte-fallback literal. Both conditions are permanent once true, so the
    # fast trainer can ban such pairs outright.
    if product in vocab_set:
        return False
    return not (mode is TokenizerMode.CHAR_LEVEL_FALLBACK and is_reserved_token(product))


# ---------------------------------------------------------------------------
# Optimized trainer
# ---------------------------------------------------------------------------

def train_bpe(corpus: Sequence[str], config: TrainConfig) -> TokenizerModel:
    """Train a BPE model; deterministic in (corpus sequence, config).

    Pair counts are maintained incrementally and the best pair is tracked in
    a lazy max-heap, so cost scales with the number of affected pieces per
    merge instead of the corpus size.
    """
    vocab, sequences = _initial_state(corpus, config)
    vocab_set = set(vocab)
    merges: list[Pair] = []

    pair_counts: dict[Pair, int] = {}
    where: dict[Pair, set[int]] = {}
    for idx, (seq, mult) in enumerate(sequences):
        for a, b in zip(seq, seq[1:]):
            pair = (a, b)
            pair_counts[pair] = pair_counts.get(pair, 0) + mult
            where.setdefault(pair, set()).add(idx)

    heap: list[tuple[int, Pair]] = [(-freq, pair) for pair, freq in pair_counts.items()]
    heapq.heapify(heap)
    banned: set[Pair] = set()

    while len(vocab) < config.vocab_size and heap:
        neg_freq, pair = heapq.heappop(heap)
        freq = pair_counts.get(pair)
        if freq is None or freq != -neg_freq:
            continue  # stale heap entry
        if pair in banned:
            continue
        if freq < config.min_pair_frequency:
            break
        left, right = pair
        product = left + right
        if not _eligible(product, config.mode, vocab_set):
            banned.add(pair)
            continue

        merges.append(pair)
        vocab.append(product)
        vocab_set.add(product)

        for idx in sorted(where.get(pair, ())):
            old_seq, mult = sequences[idx]
            new_seq = merge_adjacent(old_seq, left, right, product)
            for a, b in zip(old_seq, old_seq[1:]):
                p = (a, b)
                remaining = pair_counts[p] - mult
                if remaining <= 0:
                    del pair_counts[p]
                else:
                    pair_counts[p] = remaining
                    heapq.heappush(heap, (-remaining, p))
                owners = where.get(p)
                if owners is not None:
                    owners.discard(idx)
                    if not owners:
                        del where[p]
            for a, b in zip(new_seq, new_seq[1:]):
                p = (a, b)
                updated = pair_counts.get(p, 0) + mult
                pair_counts[p] = updated
                heapq.heappush(heap, (-updated, p))
                where.setdefault(p, set()).add(idx)
            sequences[idx] = (new_seq, mult)

    return TokenizerModel(
        mode=config.mode,
        scheme=config.scheme,
        vocab=tuple(vocab),
        merges=tuple(merges),
    )


# ---------------------------------------------------------------------------
# Reference oracle
# ---------------------------------------------------------------------------

def train_bpe_oracle(
    corpus: Sequence[str], config: TrainConfig, guard_bytes: int = ORACLE_GUARD_BYTES
) -> TokenizerModel:
    """Same contract as :func:`train_bpe`, computed by full recount after
    every merge. Quadratic; refuses corpora beyond ``guard_bytes``."""
    total = sum(len(text.encode("utf-8")) for text in corpus)
    if total > guard_bytes:
        raise CorpusTooLarge(f"oracle trainer limited to {guard_bytes} bytes, got {total}")

    vocab, sequences = _initial_state(corpus, config)
    vocab_set = set(vocab)
    merges: list[Pair] = []

    while len(vocab) < config.vocab_size:
        counts: Counter[Pair] = Counter()
        for seq, mult in sequences:
            for a, b in zip(seq, seq[1:]):
                counts[(a, b)] += mult
        candidates = [
            (freq, pair)
            for pair, freq in counts.items()
            if _eligible(pair[0] + pair[1], config.mode, vocab_set)
        ]
        if not candidates:
            break
        freq, pair = min(candidates, key=lambda fp: (-fp[0], fp[1]))
        if freq < config.min_pair_frequency:
            break
        left, right = pair
        product = left + right
        merges.append(pair)
        vocab.append(product)
        vocab_set.add(product)
        sequences = [
            (merge_adjacent(seq, left, right, product), mult) for seq, mult in sequences
        ]

    return TokenizerModel(
        mode=config.mode,
        scheme=config.scheme,
        vocab=tuple(vocab),
        merges=tuple(merges),
    )


def retrain_like(
    reference: TokenizerModel, corpus: Sequence[str], min_pair_frequency: int = 2
) -> TokenizerModel:
    """Train from scratch on ``corpus`` with the reference's configuration
    (mode, scheme, target vocabulary size)."""
    config = TrainConfig(
        vocab_size=len(reference.vocab),
        mode=reference.mode,
        scheme=reference.scheme,
        min_pair_frequency=min_pair_frequency,
    )
    return train_bpe(corpus, config)
