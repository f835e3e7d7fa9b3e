import json
import random

import pytest

from convtok.errors import (
    FormatVersionMismatch,
    IdOutOfRange,
    IntegrityError,
    InvalidByteSequence,
)
from convtok.tokenizer import (
    FALLBACK_TOKENS,
    PretokenScheme,
    TokenizerMode,
    TokenizerModel,
    base_alphabet,
    byte_symbol_map,
    decode,
    encode,
    encode_piece,
    load_model,
    model_to_bytes,
    pretokenize,
    save_model,
)
from convtok.trainer import TrainConfig, train_bpe

CAT = PretokenScheme.CATEGORY_SPLIT
WS = PretokenScheme.WHITESPACE_SPLIT


def random_text(rng, max_len=120):
    """Valid-UTF-8 string mixing scripts, whitespace runs, and symbols."""
    pools = [
        lambda: chr(rng.randrange(0x20, 0x7F)),
        lambda: chr(rng.randrange(0x20, 0x7F)),
        lambda: rng.choice(" \t\n  "),
        lambda: chr(rng.randrange(0xA0, 0x300)),
        lambda: chr(rng.randrange(0x4E00, 0x9FFF)),
        lambda: chr(rng.randrange(0x400, 0x4FF)),
        lambda: rng.choice("🎉🚀😀🧪"),
        lambda: chr(rng.randrange(0x1, 0x20)),
    ]
    return "".join(rng.choice(pools)() for _ in range(rng.randrange(max_len)))


@pytest.fixture(scope="module")
def byte_model():
    corpus = ["the cat sat on the mat", "hello world, hello again", "números y cosas"]
    return train_bpe(corpus, TrainConfig(vocab_size=300, mode=TokenizerMode.BYTE_LEVEL))


@pytest.fixture(scope="module")
def char_model():
    corpus = ["the cat sat on the mat", "hello world, hello again"]
    return train_bpe(
        corpus,
        TrainConfig(vocab_size=330, mode=TokenizerMode.CHAR_LEVEL_FALLBACK),
    )


def toy_char_model(extra_vocab=("a", "b", "ab"), merges=(("a", "b"),)):
    return TokenizerModel(
        mode=TokenizerMode.CHAR_LEVEL_FALLBACK,
        scheme=CAT,
        vocab=FALLBACK_TOKENS + tuple(extra_vocab),
        merges=tuple(merges),
    )


# ---------------------------------------------------------------------------
# Byte symbol map
# ---------------------------------------------------------------------------

class TestByteSymbolMap:
    def test_identity_ranges(self):
        mapping = byte_symbol_map()
        assert mapping[0x41] == "A"
        assert mapping[0x7E] == "~"
        assert mapping[0xFF] == chr(0xFF)

    def test_shifted_values(self):
        # derived by counting non-identity bytes in increasing order
        mapping = byte_symbol_map()
        assert mapping[0x20] == chr(288)
        assert mapping[0x00] == chr(256)
        assert mapping[0x7F] == chr(289)
        assert mapping[0xAD] == chr(323)

    def test_bijection(self):
        mapping = byte_symbol_map()
        assert len(mapping) == 256
        assert len(set(mapping.values())) == 256

    def test_matches_independent_enumeration(self):
        # independent reconstruction of the stated rule
        expected = {}
        shifted = 0
        for b in range(256):
            if 0x21 <= b <= 0x7E or 0xA1 <= b <= 0xAC or 0xAE <= b <= 0xFF:
                expected[b] = chr(b)
            else:
                expected[b] = chr(256 + shifted)
                shifted += 1
        assert shifted == 68
        assert byte_symbol_map() == expected


# ---------------------------------------------------------------------------
# Pretokenization
# ---------------------------------------------------------------------------

class TestPretokenize:
    def test_two_words(self):
        assert pretokenize("hello world", CAT) == ["hello", " world"]

    def test_empty(self):
        assert pretokenize("", CAT) == []
        assert pretokenize("", WS) == []

    def test_category_boundaries(self):
        assert pretokenize("ab12, cd", CAT) == ["ab", "12", ",", " cd"]

    def test_single_space_attaches_to_digits(self):
        assert pretokenize("x 42", CAT) == ["x", " 42"]

    def test_space_not_attached_to_symbols(self):
        assert pretokenize("a !", CAT) == ["a", " ", "!"]

    def test_long_whitespace_run(self):
        assert pretokenize("a  b", CAT) == ["a", " ", " b"]
        assert pretokenize("a \t b", CAT) == ["a", " \t", " b"]

    def test_only_ascii_space_attaches(self):
        assert pretokenize("a b", CAT) == ["a", " ", "b"]
        assert pretokenize("a\tb", CAT) == ["a", "\t", "b"]

    def test_whitespace_split(self):
        assert pretokenize("hello world", WS) == ["hello", " ", "world"]
        assert pretokenize(" x\t\ty ", WS) == [" ", "x", "\t\t", "y", " "]

    @pytest.mark.parametrize("scheme", [CAT, WS])
    def test_lossless_on_fuzz(self, scheme):
        rng = random.Random(1234)
        for _ in range(400):
            text = random_text(rng)
            pieces = pretokenize(text, scheme)
            assert "".join(pieces) == text

    def test_whitespace_split_pieces_are_pure(self):
        rng = random.Random(5)
        for _ in range(100):
            for piece in pretokenize(random_text(rng), WS):
                kinds = {ch.isspace() for ch in piece}
                assert len(kinds) == 1


# ---------------------------------------------------------------------------
# Encode / decode
# ---------------------------------------------------------------------------

class TestEncode:
    def test_empty(self, byte_model):
        assert encode(byte_model, "") == []

    def test_merge_application(self):
        model = toy_char_model()
        ids = encode(model, "abab")
        assert [model.vocab[i] for i in ids] == ["ab", "ab"]

    def test_merges_apply_in_rank_order(self):
        # (b, c) outranks (a, b), so "abc" becomes [a, bc]
        model = toy_char_model(
            extra_vocab=("a", "b", "c", "bc", "ab"),
            merges=(("b", "c"), ("a", "b")),
        )
        ids = encode(model, "abc")
        assert [model.vocab[i] for i in ids] == ["a", "bc"]

    def test_byte_fallback_for_unknown_char(self):
        model = toy_char_model()
        ids = encode(model, "é")
        assert [model.vocab[i] for i in ids] == ["<0xC3>", "<0xA9>"]
        assert decode(model, ids) == "é"

    def test_no_merge_across_pieces(self, byte_model):
        rng = random.Random(77)
        for _ in range(100):
            text = random_text(rng)
            per_piece = []
            for piece in pretokenize(text, byte_model.scheme):
                per_piece.extend(encode_piece(byte_model, piece))
            assert per_piece == encode(byte_model, text)

    def test_never_longer_than_base_symbols(self, byte_model, char_model):
        rng = random.Random(31)
        for _ in range(100):
            text = random_text(rng)
            assert len(encode(byte_model, text)) <= len(text.encode("utf-8"))
            assert len(encode(char_model, text)) <= 4 * len(text)


class TestDecode:
    def test_empty(self, byte_model):
        assert decode(byte_model, []) == ""

    def test_roundtrip_simple(self, byte_model, char_model):
        for model in (byte_model, char_model):
            for text in ("hello", "hello world", "¡héllo! 你好\n\t", "🎉 emoji"):
                assert decode(model, encode(model, text)) == text

    @pytest.mark.parametrize("mode_fixture", ["byte_model", "char_model"])
    def test_roundtrip_fuzz(self, mode_fixture, request):
        model = request.getfixturevalue(mode_fixture)
        rng = random.Random(4321)
        for _ in range(300):
            text = random_text(rng)
            assert decode(model, encode(model, text)) == text

    def test_id_out_of_range(self, byte_model, char_model):
        with pytest.raises(IdOutOfRange):
            decode(byte_model, [len(byte_model.vocab)])
        with pytest.raises(IdOutOfRange):
            decode(char_model, [-1])

    def test_invalid_fallback_bytes(self):
        model = toy_char_model()
        lone_continuation = model.token_id("<0xC3>")
        with pytest.raises(InvalidByteSequence):
            decode(model, [lone_continuation])

    def test_invalid_byte_mode_sequence(self, byte_model):
        c3_symbol = byte_symbol_map()[0xC3]
        with pytest.raises(InvalidByteSequence):
            decode(byte_model, [byte_model.token_id(c3_symbol)])


# ---------------------------------------------------------------------------
# Model validation and serialization
# ---------------------------------------------------------------------------

class TestModel:
    def test_duplicate_vocab_rejected(self):
        with pytest.raises(IntegrityError):
            TokenizerModel(
                mode=TokenizerMode.CHAR_LEVEL_FALLBACK,
                scheme=CAT,
                vocab=FALLBACK_TOKENS + ("a", "a"),
                merges=(),
            )

    def test_base_alphabet_required(self):
        vocab = list(base_alphabet(TokenizerMode.BYTE_LEVEL))
        vocab[0], vocab[1] = vocab[1], vocab[0]
        with pytest.raises(IntegrityError):
            TokenizerModel(
                mode=TokenizerMode.BYTE_LEVEL, scheme=CAT, vocab=tuple(vocab), merges=()
            )

    def test_dangling_merge_rejected(self):
        with pytest.raises(IntegrityError):
            toy_char_model(extra_vocab=("a", "b"), merges=(("a", "b"),))

    def test_save_load_roundtrip(self, tmp_path, byte_model):
        path = tmp_path / "model.json"
        save_model(byte_model, path)
        assert load_model(path) == byte_model

    def test_serialization_canonical(self, byte_model):
        clone = TokenizerModel(
            mode=byte_model.mode,
            scheme=byte_model.scheme,
            vocab=tuple(byte_model.vocab),
            merges=tuple(byte_model.merges),
        )
        assert model_to_bytes(clone) == model_to_bytes(byte_model)
        obj = json.loads(model_to_bytes(byte_model))
        assert list(obj) == ["version", "mode", "scheme", "vocab", "merges"]

    def test_tampered_merge_is_integrity_error(self, tmp_path, byte_model):
        path = tmp_path / "model.json"
        save_model(byte_model, path)
        obj = json.loads(path.read_text(encoding="utf-8"))
        obj["merges"].append(["zzz", "qqq"])
        path.write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")
        with pytest.raises(IntegrityError):
            load_model(path)

    def test_version_mismatch(self, tmp_path, byte_model):
        path = tmp_path / "model.json"
        save_model(byte_model, path)
        obj = json.loads(path.read_text(encoding="utf-8"))
        obj["version"] = 2
        path.write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")
        with pytest.raises(FormatVersionMismatch):
            load_model(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("not a model", encoding="utf-8")
        with pytest.raises(IntegrityError):
            load_model(path)
