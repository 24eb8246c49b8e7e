"""Bidirectional conversion between integers 0..9999 and their English/German verbal forms.

The generators define the canonical surface forms used everywhere else
(dataset generation, training targets, evaluation).  The parsers accept
exactly the language produced by the generators and act as an independent
oracle: parse(to_words(n)) == n for every n in range.

German forms use the umlaut-free spellings ('funf', 'dreissig') so that
every string fits the 28-character task alphabet (a..z, space, hyphen).
"""

MIN_NUMBER = 0
MAX_NUMBER = 9999

ENGLISH = "english"
GERMAN = "german"


class ParseError(ValueError):
    """Raised for any string not generated by to_english/to_german.

    `offset` is the byte offset of the first offending position.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


def _check_range(n: int) -> None:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"expected int, got {type(n).__name__}")
    if not MIN_NUMBER <= n <= MAX_NUMBER:
        raise ValueError(f"number out of range [0, 9999]: {n}")


# ---------------------------------------------------------------------------
# English

_ONES_EN = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen",
]
_TENS_EN = {
    2: "twenty", 3: "thirty", 4: "forty", 5: "fifty",
    6: "sixty", 7: "seventy", 8: "eighty", 9: "ninety",
}


def _tens_units_en(n: int) -> str:
    # n in 1..99; compound tens are hyphenated ("twenty-five")
    if n < 20:
        return _ONES_EN[n]
    t, u = divmod(n, 10)
    word = _TENS_EN[t]
    return f"{word}-{_ONES_EN[u]}" if u else word


def to_english(n: int) -> str:
    """Render n as English words: '<units> thousand <units> hundred and <tens-units>'.

    Absent groups are omitted; 'and' appears only before a nonzero final
    tens-units group when a hundreds or thousands group is present.
    """
    _check_range(n)
    if n == 0:
        return "zero"
    thousands, rest = divmod(n, 1000)
    hundreds, tens_units = divmod(rest, 100)
    parts = []
    if thousands:
        parts.append(f"{_ONES_EN[thousands]} thousand")
    if hundreds:
        parts.append(f"{_ONES_EN[hundreds]} hundred")
    head = " ".join(parts)
    if not tens_units:
        return head
    tail = _tens_units_en(tens_units)
    return f"{head} and {tail}" if head else tail


# word -> value for every final tens-units token ("five", "seventeen",
# "twenty", "twenty-five", ...)
_TU_WORDS_EN = {_ONES_EN[i]: i for i in range(1, 20)}
for _t, _tw in _TENS_EN.items():
    _TU_WORDS_EN[_tw] = 10 * _t
    for _u in range(1, 10):
        _TU_WORDS_EN[f"{_tw}-{_ONES_EN[_u]}"] = 10 * _t + _u

_UNIT_WORDS_EN = {_ONES_EN[i]: i for i in range(1, 10)}


def _tokenize(s: str) -> list[tuple[str, int]]:
    # Single spaces only; leading/trailing/double spaces are offsets of
    # empty tokens and rejected here.
    tokens = []
    offset = 0
    for word in s.split(" "):
        if not word:
            raise ParseError("unexpected space", offset)
        tokens.append((word, offset))
        offset += len(word) + 1
    return tokens


def parse_english(s: str) -> int:
    """Inverse of to_english; ParseError for anything outside its image."""
    if not s:
        raise ParseError("empty input", 0)
    tokens = _tokenize(s)
    pos = 0

    def peek(k: int = 0):
        return tokens[pos + k][0] if pos + k < len(tokens) else None

    if tokens[0][0] == "zero":
        if len(tokens) > 1:
            raise ParseError("trailing input after 'zero'", tokens[1][1])
        return 0

    value = 0
    have_group = False
    if peek(1) == "thousand" and peek() in _UNIT_WORDS_EN:
        value += 1000 * _UNIT_WORDS_EN[peek()]
        pos += 2
        have_group = True
    if peek(1) == "hundred" and peek() in _UNIT_WORDS_EN:
        value += 100 * _UNIT_WORDS_EN[peek()]
        pos += 2
        have_group = True

    if have_group:
        if pos == len(tokens):
            return value
        if peek() != "and":
            raise ParseError(f"expected 'and', got {peek()!r}", tokens[pos][1])
        pos += 1
        if pos == len(tokens):
            raise ParseError("dangling 'and'", len(s))

    word, offset = tokens[pos] if pos < len(tokens) else (None, len(s))
    if word not in _TU_WORDS_EN:
        raise ParseError(f"not a tens-units word: {word!r}", offset)
    value += _TU_WORDS_EN[word]
    pos += 1
    if pos != len(tokens):
        raise ParseError("trailing input", tokens[pos][1])
    return value


# ---------------------------------------------------------------------------
# German

_UNITS_DE = {
    1: "eins", 2: "zwei", 3: "drei", 4: "vier", 5: "funf",
    6: "sechs", 7: "sieben", 8: "acht", 9: "neun",
}
# prefix forms used inside compounds: "einhundert", "einundzwanzig"
_UNIT_PREFIX_DE = {**_UNITS_DE, 1: "ein"}
_TEENS_DE = {
    10: "zehn", 11: "elf", 12: "zwolf", 13: "dreizehn", 14: "vierzehn",
    15: "funfzehn", 16: "sechzehn", 17: "siebzehn", 18: "achtzehn",
    19: "neunzehn",
}
_TENS_DE = {
    2: "zwanzig", 3: "dreissig", 4: "vierzig", 5: "funfzig",
    6: "sechzig", 7: "siebzig", 8: "achtzig", 9: "neunzig",
}


def _tens_units_de(n: int) -> str:
    # n in 1..99
    if n < 10:
        return _UNITS_DE[n]
    if n < 20:
        return _TEENS_DE[n]
    t, u = divmod(n, 10)
    word = _TENS_DE[t]
    return f"{_UNIT_PREFIX_DE[u]}und{word}" if u else word


def to_german(n: int) -> str:
    """Render n as German words: thousands/hundreds words concatenated,
    one space before the final tens-units word ('einhundert einundneunzig').
    """
    _check_range(n)
    if n == 0:
        return "null"
    thousands, rest = divmod(n, 1000)
    hundreds, tens_units = divmod(rest, 100)
    head = ""
    if thousands:
        head += f"{_UNIT_PREFIX_DE[thousands]}tausend"
    if hundreds:
        head += f"{_UNIT_PREFIX_DE[hundreds]}hundert"
    if not tens_units:
        return head
    tail = _tens_units_de(tens_units)
    return f"{head} {tail}" if head else tail


_TU_WORDS_DE = {w: n for n, w in _UNITS_DE.items()}
_TU_WORDS_DE.update({w: n for n, w in _TEENS_DE.items()})
for _t, _tw in _TENS_DE.items():
    _TU_WORDS_DE[_tw] = 10 * _t
    for _u in range(1, 10):
        _TU_WORDS_DE[f"{_UNIT_PREFIX_DE[_u]}und{_tw}"] = 10 * _t + _u


def parse_german(s: str) -> int:
    """Inverse of to_german; ParseError for anything outside its image."""
    if not s:
        raise ParseError("empty input", 0)
    if s == "null":
        return 0

    pos = 0
    value = 0
    for u in range(1, 10):
        word = f"{_UNIT_PREFIX_DE[u]}tausend"
        if s.startswith(word):
            value += 1000 * u
            pos = len(word)
            break
    for u in range(1, 10):
        word = f"{_UNIT_PREFIX_DE[u]}hundert"
        if s.startswith(word, pos):
            value += 100 * u
            pos += len(word)
            break

    if pos:
        if pos == len(s):
            return value
        if s[pos] != " ":
            raise ParseError("expected space before tens-units word", pos)
        pos += 1

    tail = s[pos:]
    if tail not in _TU_WORDS_DE:
        raise ParseError(f"not a tens-units word: {tail!r}", pos)
    return value + _TU_WORDS_DE[tail]


def to_words(n: int, language: str) -> str:
    if language == ENGLISH:
        return to_english(n)
    if language == GERMAN:
        return to_german(n)
    raise ValueError(f"unknown language: {language!r}")


def parse_words(s: str, language: str) -> int:
    if language == ENGLISH:
        return parse_english(s)
    if language == GERMAN:
        return parse_german(s)
    raise ValueError(f"unknown language: {language!r}")
