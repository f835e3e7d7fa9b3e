"""Tokenizer models with lossless encode/decode.

Two model flavors are supported:

* ``byte_level`` -- the working alphabet is the 256 byte values, each mapped
  to a distinct printable character so tokens stay readable strings. Every
  input is encodable by construction.
* ``char_level_fallback`` -- the working alphabet is the characters seen at
  training time; characters outside the vocabulary are encoded as reserved
  per-byte fallback tokens ``<0x00>`` .. ``<0xFF>``, so nothing is ever
  out-of-vocabulary.

Merges are applied strictly in rank order (position in the merge list) and
never across pretokenization boundaries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import (
    FormatVersionMismatch,
    IdOutOfRange,
    IntegrityError,
    InvalidByteSequence,
    InvalidEncoding,
)

MODEL_FORMAT_VERSION = 1
N_BYTE_SYMBOLS = 256


class TokenizerMode(str, Enum):
    BYTE_LEVEL = "byte_level"
    CHAR_LEVEL_FALLBACK = "char_level_fallback"


class PretokenScheme(str, Enum):
    CATEGORY_SPLIT = "category_split"
    WHITESPACE_SPLIT = "whitespace_split"


# ---------------------------------------------------------------------------
# Byte <-> symbol mapping (byte_level mode)
# ---------------------------------------------------------------------------

def _build_byte_symbol_map() -> dict[int, str]:
    identity = [
        b for b in range(256)
        if 0x21 <= b <= 0x7E or 0xA1 <= b <= 0xAC or 0xAE <= b <= 0xFF
    ]
    mapping = {b: chr(b) for b in identity}
    shifted = 0
    for b in range(256):
        if b not in mapping:
            mapping[b] = chr(N_BYTE_SYMBOLS + shifted)
            shifted += 1
    return mapping


_BYTE_TO_CHAR_MAP = _build_byte_symbol_map()
_BYTE_TO_CHAR: tuple[str, ...] = tuple(_BYTE_TO_CHAR_MAP[b] for b in range(256))
_CHAR_TO_BYTE: dict[str, int] = {c: b for b, c in enumerate(_BYTE_TO_CHAR)}

FALLBACK_TOKENS: tuple[str, ...] = tuple(f"<0x{b:02X}>" for b in range(256))
_FALLBACK_SET = frozenset(FALLBACK_TOKENS)


def byte_symbol_map() -> dict[int, str]:
    """Bijection from byte value to the character that stands for it.

    Self-representable bytes (0x21-0x7E, 0xA1-0xAC, 0xAE-0xFF) map to their
    own code point; the remaining 68 values map, in increasing byte order, to
    code points 256..323.
    """
    return dict(_BYTE_TO_CHAR_MAP)


def base_alphabet(mode: TokenizerMode) -> tuple[str, ...]:
    """First 256 vocabulary entries required for a mode."""
    if mode is TokenizerMode.BYTE_LEVEL:
        return _BYTE_TO_CHAR
    return FALLBACK_TOKENS


def is_reserved_token(token: str) -> bool:
    """True for the ``<0xHH>`` byte-fallback literals."""
    return token in _FALLBACK_SET


# ---------------------------------------------------------------------------
# Pretokenization
# ---------------------------------------------------------------------------

_WS, _LETTER, _DIGIT, _SYMBOL = 0, 1, 2, 3
_class_cache: dict[str, int] = {}


def _char_class(ch: str) -> int:
    cls = _class_cache.get(ch)
    if cls is None:
        if ch.isspace():
            cls = _WS
        elif ch.isalpha():
            cls = _LETTER
        elif ch.isnumeric():
            cls = _DIGIT
        else:
            cls = _SYMBOL
        _class_cache[ch] = cls
    return cls


def _class_runs(text: str, split_non_ws: bool) -> list[tuple[int, int, int]]:
    """Maximal same-class runs as (class, start, end). With ``split_non_ws``
    False, all non-whitespace classes collapse into one."""
    runs: list[tuple[int, int, int]] = []
    start = 0
    prev = -1
    for i, ch in enumerate(text):
        cls = _char_class(ch)
        if not split_non_ws and cls != _WS:
            cls = _SYMBOL
        if cls != prev:
            if prev != -1:
                runs.append((prev, start, i))
            start = i
            prev = cls
    if prev != -1:
        runs.append((prev, start, len(text)))
    return runs


def pretokenize(text: str, scheme: PretokenScheme) -> list[str]:
    """Split text into pieces across which merges are forbidden.

    The segmentation is lossless: ``"".join(pieces) == text`` always holds.
    ``category_split`` breaks at letter/digit/symbol boundaries, keeps
    whitespace runs as pieces, and attaches a single leading space (U+0020)
    to a following letter or digit run. ``whitespace_split`` only separates
    whitespace runs from non-whitespace runs.
    """
    if scheme is PretokenScheme.WHITESPACE_SPLIT:
        return [text[s:e] for _, s, e in _class_runs(text, split_non_ws=False)]

    runs = _class_runs(text, split_non_ws=True)
    pieces: list[str] = []
    i = 0
    n = len(runs)
    while i < n:
        cls, s, e = runs[i]
        if cls == _WS and i + 1 < n and text[e - 1] == " ":
            nxt_cls, _, nxt_e = runs[i + 1]
            if nxt_cls in (_LETTER, _DIGIT):
                if e - 1 > s:
                    pieces.append(text[s:e - 1])
                pieces.append(text[e - 1:nxt_e])
                i += 2
                continue
        pieces.append(text[s:e])
        i += 1
    return pieces


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TokenizerModel:
    """Immutable tokenizer: vocabulary (index = token id) plus ranked merges.

    Safe for unlimited concurrent readers; encode/decode are pure.
    """

    mode: TokenizerMode
    scheme: PretokenScheme
    vocab: tuple[str, ...]
    merges: tuple[tuple[str, str], ...]
    version: int = MODEL_FORMAT_VERSION

    def __post_init__(self):
        token_ids = {tok: i for i, tok in enumerate(self.vocab)}
        object.__setattr__(self, "_token_ids", token_ids)
        object.__setattr__(
            self, "_merge_ranks", {pair: r for r, pair in enumerate(self.merges)}
        )
        object.__setattr__(self, "_piece_cache", {})
        self._validate(token_ids)

    def _validate(self, token_ids: dict[str, int]) -> None:
        if len(token_ids) != len(self.vocab):
            raise IntegrityError("vocabulary contains duplicate tokens")
        if len(self.vocab) < N_BYTE_SYMBOLS:
            raise IntegrityError("vocabulary smaller than the base alphabet")
        base = base_alphabet(self.mode)
        if self.vocab[:N_BYTE_SYMBOLS] != base:
            raise IntegrityError(
                "first 256 vocabulary entries must be the base alphabet"
            )
        for left, right in self.merges:
            if left not in token_ids or right not in token_ids:
                raise IntegrityError(f"merge operand missing from vocab: ({left!r}, {right!r})")
            if left + right not in token_ids:
                raise IntegrityError(f"merge product missing from vocab: {left + right!r}")
        if self.mode is TokenizerMode.BYTE_LEVEL:
            for tok in self.vocab[N_BYTE_SYMBOLS:]:
                if any(ch not in _CHAR_TO_BYTE for ch in tok):
                    raise IntegrityError(f"token contains unmapped characters: {tok!r}")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def token_id(self, token: str) -> int:
        return self._token_ids[token]


def merge_adjacent(symbols: list[str], left: str, right: str, joined: str) -> list[str]:
    """Replace (left, right) adjacencies left-to-right without overlap."""
    out: list[str] = []
    i = 0
    n = len(symbols)
    while i < n:
        if symbols[i] == left and i + 1 < n and symbols[i + 1] == right:
            out.append(joined)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _base_symbols(model: TokenizerModel, piece: str) -> list[str]:
    if model.mode is TokenizerMode.BYTE_LEVEL:
        b2c = _BYTE_TO_CHAR
        return [b2c[b] for b in piece.encode("utf-8")]
    token_ids = model._token_ids
    symbols: list[str] = []
    for ch in piece:
        if ch in token_ids:
            symbols.append(ch)
        else:
            symbols.extend(FALLBACK_TOKENS[b] for b in ch.encode("utf-8"))
    return symbols


def _apply_merges(model: TokenizerModel, symbols: list[str]) -> list[str]:
    ranks = model._merge_ranks
    if not ranks:
        return symbols
    while len(symbols) >= 2:
        best_rank: int | None = None
        best_pair: tuple[str, str] | None = None
        prev = symbols[0]
        for cur in symbols[1:]:
            rank = ranks.get((prev, cur))
            if rank is not None and (best_rank is None or rank < best_rank):
                best_rank = rank
                best_pair = (prev, cur)
            prev = cur
        if best_pair is None:
            break
        symbols = merge_adjacent(symbols, best_pair[0], best_pair[1], best_pair[0] + best_pair[1])
    return symbols


def encode_piece(model: TokenizerModel, piece: str) -> tuple[int, ...]:
    """Token ids for one pretokenized piece. Results are memoized per model."""
    cache: dict[str, tuple[int, ...]] = model._piece_cache
    ids = cache.get(piece)
    if ids is None:
        symbols = _apply_merges(model, _base_symbols(model, piece))
        token_ids = model._token_ids
        ids = tuple(token_ids[s] for s in symbols)
        cache[piece] = ids
    return ids


def encode(model: TokenizerModel, text: str) -> list[int]:
    """Encode text to token ids. Total: every valid UTF-8 string is encodable."""
    ids: list[int] = []
    for piece in pretokenize(text, model.scheme):
        ids.extend(encode_piece(model, piece))
    return ids


def decode(model: TokenizerModel, ids: list[int]) -> str:
    """Invert :func:`encode`. ``decode(model, encode(model, s)) == s``."""
    vocab = model.vocab
    n = len(vocab)
    if model.mode is TokenizerMode.BYTE_LEVEL:
        chars: list[str] = []
        for i in ids:
            if not 0 <= i < n:
                raise IdOutOfRange(f"token id {i} outside vocabulary of {n}")
            chars.append(vocab[i])
        data = bytes(_CHAR_TO_BYTE[c] for c in "".join(chars))
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InvalidByteSequence(f"token bytes are not valid UTF-8: {exc}") from exc

    parts: list[str] = []
    pending = bytearray()

    def flush() -> None:
        if pending:
            try:
                parts.append(pending.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise InvalidByteSequence(
                    f"fallback bytes are not valid UTF-8: {exc}"
                ) from exc
            pending.clear()

    for i in ids:
        if not 0 <= i < n:
            raise IdOutOfRange(f"token id {i} outside vocabulary of {n}")
        if i < N_BYTE_SYMBOLS:
            pending.append(i)
        else:
            flush()
            parts.append(vocab[i])
    flush()
    return "".join(parts)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def model_to_bytes(model: TokenizerModel) -> bytes:
    """Canonical serialization: fixed key order, compact separators, UTF-8.

    Structurally equal models produce byte-identical output.
    """
    obj = {
        "version": model.version,
        "mode": model.mode.value,
        "scheme": model.scheme.value,
        "vocab": list(model.vocab),
        "merges": [list(pair) for pair in model.merges],
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")).encode("utf-8")


def save_model(model: TokenizerModel, path: str | Path) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path: str | Path) -> TokenizerModel:
    """Load and fully validate a model file.

    Raises FormatVersionMismatch for unknown versions and IntegrityError for
    structural damage (dangling merges, duplicate or reordered vocab, ...).
    """
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"model file is not UTF-8: {path}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IntegrityError(f"model file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise IntegrityError("model file must contain a JSON object")
    version = obj.get("version")
    if version != MODEL_FORMAT_VERSION:
        raise FormatVersionMismatch(
            f"unsupported model format version: {version!r} (expected {MODEL_FORMAT_VERSION})"
        )
    try:
        mode = TokenizerMode(obj["mode"])
        scheme = PretokenScheme(obj["scheme"])
    except (KeyError, ValueError) as exc:
        raise IntegrityError(f"bad mode/scheme field: {exc}") from exc
    vocab = obj.get("vocab")
    merges = obj.get("merges")
    if not isinstance(vocab, list) or not all(isinstance(t, str) for t in vocab):
        raise IntegrityError("vocab must be a list of strings")
    if not isinstance(merges, list):
        raise IntegrityError("merges must be a list")
    merge_pairs: list[tuple[str, str]] = []
    for entry in merges:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(t, str) for t in entry)
        ):
            raise IntegrityError(f"bad merge entry: {entry!r}")
        merge_pairs.append((entry[0], entry[1]))
    return TokenizerModel(
        mode=mode,
        scheme=scheme,
        vocab=tuple(vocab),
        merges=tuple(merge_pairs),
        version=version,
    )
