"""Letter-wise and digit-wise one-hot codecs.

Strings are coded slot by slot: 50 slots, 29 symbols per slot
(a..z, space, hyphen, PAD), giving a 1450-dim vector.  Numbers are coded
digit by digit after zero-padding to 4 digits: 4 blocks of 10, 40 dims.
Decoding takes per-block argmax (lowest index wins ties) and is total on
arbitrary real vectors, so raw network outputs can always be decoded.
"""

import numpy as np

ALPHABET = "abcdefghijklmnopqrstuvwxyz -"
PAD_INDEX = len(ALPHABET)          # 28; the 29th symbol fills unused slots
N_SYMBOLS = PAD_INDEX + 1          # 29
MAX_LEN = 50
TEXT_CODE_LEN = MAX_LEN * N_SYMBOLS    # 1450
N_DIGITS = 4
DIGIT_CODE_LEN = N_DIGITS * 10         # 40

_CHAR_TO_INDEX = {c: i for i, c in enumerate(ALPHABET)}


class EncodingError(ValueError):
    pass


class InvalidCharacter(EncodingError):
    pass


class TooLong(EncodingError):
    pass


class WrongLength(EncodingError):
    pass


def encode_text(s: str, dtype=np.float32) -> np.ndarray:
    """One-hot code of s, PAD-filled to 50 slots; shape (1450,)."""
    if len(s) > MAX_LEN:
        raise TooLong(f"string of length {len(s)} exceeds {MAX_LEN}: {s!r}")
    indices = np.full(MAX_LEN, PAD_INDEX, dtype=np.intp)
    for i, c in enumerate(s):
        try:
            indices[i] = _CHAR_TO_INDEX[c]
        except KeyError:
            raise InvalidCharacter(f"character {c!r} at position {i} not in alphabet") from None
    code = np.zeros((MAX_LEN, N_SYMBOLS), dtype=dtype)
    code[np.arange(MAX_LEN), indices] = 1
    return code.reshape(TEXT_CODE_LEN)


def decode_text(v: np.ndarray) -> str:
    """Per-slot argmax decode of a 1450-vector, truncated at the first PAD."""
    v = np.asarray(v)
    if v.shape != (TEXT_CODE_LEN,):
        raise WrongLength(f"expected shape ({TEXT_CODE_LEN},), got {v.shape}")
    indices = v.reshape(MAX_LEN, N_SYMBOLS).argmax(axis=1)
    chars = []
    for i in indices:
        if i == PAD_INDEX:
            break
        chars.append(ALPHABET[i])
    return "".join(chars)


def decode_text_slots(v: np.ndarray) -> np.ndarray:
    """Per-slot argmax symbol indices, without PAD truncation; shape (50,)."""
    v = np.asarray(v)
    if v.shape != (TEXT_CODE_LEN,):
        raise WrongLength(f"expected shape ({TEXT_CODE_LEN},), got {v.shape}")
    return v.reshape(MAX_LEN, N_SYMBOLS).argmax(axis=1)


def encode_digits(n: int, dtype=np.float32) -> np.ndarray:
    """Digit-wise one-hot of n zero-padded to 4 digits; shape (40,)."""
    if not 0 <= n <= 9999:
        raise ValueError(f"number out of range [0, 9999]: {n}")
    code = np.zeros((N_DIGITS, 10), dtype=dtype)
    for k, c in enumerate(f"{n:04d}"):
        code[k, int(c)] = 1
    return code.reshape(DIGIT_CODE_LEN)


def decode_digits(v: np.ndarray) -> int:
    """Per-block argmax decode of a 40-vector back to an integer."""
    v = np.asarray(v)
    if v.shape != (DIGIT_CODE_LEN,):
        raise WrongLength(f"expected shape ({DIGIT_CODE_LEN},), got {v.shape}")
    digits = v.reshape(N_DIGITS, 10).argmax(axis=1)
    return int("".join(str(d) for d in digits))


def encode_text_batch(strings, dtype=np.float32) -> np.ndarray:
    return np.stack([encode_text(s, dtype=dtype) for s in strings])


def encode_digits_batch(numbers, dtype=np.float32) -> np.ndarray:
    return np.stack([encode_digits(n, dtype=dtype) for n in numbers])
