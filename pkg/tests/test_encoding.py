import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tranet import encoding, numword
from tranet.encoding import (
    ALPHABET, DIGIT_CODE_LEN, MAX_LEN, N_SYMBOLS, PAD_INDEX, TEXT_CODE_LEN,
    decode_digits, decode_text, decode_text_slots, encode_digits, encode_text,
)


def test_alphabet_shape():
    assert len(ALPHABET) == 28
    assert len(set(ALPHABET)) == 28
    assert ALPHABET.index("a") == 0
    assert N_SYMBOLS == 29
    assert PAD_INDEX == 28
    assert TEXT_CODE_LEN == 1450
    assert DIGIT_CODE_LEN == 40


def test_encode_single_letters():
    v = encode_text("a")
    blocks = v.reshape(MAX_LEN, N_SYMBOLS)
    assert blocks[0, 0] == 1 and blocks[0].sum() == 1
    assert (blocks[1:, PAD_INDEX] == 1).all()

    v = encode_text("b")
    assert v.reshape(MAX_LEN, N_SYMBOLS)[0, 1] == 1


def test_encode_empty_is_all_pad():
    blocks = encode_text("").reshape(MAX_LEN, N_SYMBOLS)
    assert (blocks[:, PAD_INDEX] == 1).all()
    assert blocks.sum() == MAX_LEN


def test_encode_text_errors():
    with pytest.raises(encoding.InvalidCharacter):
        encode_text("Zwei")
    with pytest.raises(encoding.TooLong):
        encode_text("a" * 51)
    with pytest.raises(encoding.WrongLength):
        decode_text(np.zeros(1449))


def test_decode_tie_break_and_truncation():
    assert decode_text(np.zeros(TEXT_CODE_LEN)) == "a" * MAX_LEN
    v = np.zeros(TEXT_CODE_LEN)
    v[PAD_INDEX] = 1.0       # block 0 peaks at PAD
    assert decode_text(v) == ""


def test_round_trip_examples():
    assert decode_text(encode_text("twenty-five")) == "twenty-five"
    assert decode_digits(encode_digits(4225)) == 4225
    assert decode_digits(np.zeros(DIGIT_CODE_LEN)) == 0


def test_encode_digits_hot_indices():
    assert set(np.flatnonzero(encode_digits(25))) == {0, 10, 22, 35}
    assert set(np.flatnonzero(encode_digits(0))) == {0, 10, 20, 30}
    assert set(np.flatnonzero(encode_digits(9999))) == {9, 19, 29, 39}


def test_decode_digits_peaks():
    v = np.zeros(DIGIT_CODE_LEN)
    for block, digit in enumerate((7, 6, 6, 0)):
        v[10 * block + digit] = 0.9
    assert decode_digits(v) == 7660


def test_exhaustive_round_trips():
    for n in range(10000):
        assert decode_digits(encode_digits(n)) == n
        for s in (numword.to_english(n), numword.to_german(n)):
            code = encode_text(s)
            blocks = code.reshape(MAX_LEN, N_SYMBOLS)
            assert (blocks.sum(axis=1) == 1).all()
            assert decode_text(code) == s


def test_pad_suffix_contiguous():
    for s in ("", "a", "twenty-five", "x" * 50):
        slots = decode_text_slots(encode_text(s))
        pads = np.flatnonzero(slots == PAD_INDEX)
        assert list(pads) == list(range(len(s), MAX_LEN))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, TEXT_CODE_LEN, elements=st.floats(-1e6, 1e6)))
def test_decode_text_total_on_real_vectors(v):
    s = decode_text(v)
    assert len(s) <= MAX_LEN
    assert set(s) <= set(ALPHABET)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, DIGIT_CODE_LEN, elements=st.floats(-1e6, 1e6)))
def test_decode_digits_total_on_real_vectors(v):
    assert 0 <= decode_digits(v) <= 9999
