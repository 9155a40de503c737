"""Words, presentations and the presentation file format.

Words are tuples of letter indices. Letters are dense, 0-based and only
turned back into characters by the parser's symbol table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

MAX_ALPHABET = 64
MAX_WORD_LENGTH = 1 << 16
EMPTY_WORD_LITERAL = "1"

Word = tuple  # tuple[int, ...]


class PresentationError(ValueError):
    """Malformed presentation text or structure."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CongruenceKind(str, Enum):
    RIGHT = "right"
    LEFT = "left"
    TWOSIDED = "twosided"


@dataclass(frozen=True)
class Relation:
    lhs: Word
    rhs: Word

    def __iter__(self):
        yield self.lhs
        yield self.rhs

    def reversed(self) -> "Relation":
        return Relation(reverse_word(self.lhs), reverse_word(self.rhs))


@dataclass(frozen=True)
class Presentation:
    """A monoid presentation over letters ``0 .. alphabet_size - 1``.

    ``zero`` names the letter acting as a zero element when the
    presentation is a monoid-with-zero presentation; the absorbing
    relations for that letter are implicit.
    """

    alphabet_size: int
    relations: tuple = ()
    zero: int | None = None
    letters: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= self.alphabet_size <= MAX_ALPHABET:
            raise PresentationError(
                f"alphabet size must be between 1 and {MAX_ALPHABET}, got {self.alphabet_size}"
            )
        rels = tuple(
            r if isinstance(r, Relation) else Relation(tuple(r[0]), tuple(r[1]))
            for r in self.relations
        )
        object.__setattr__(self, "relations", rels)
        for rel in rels:
            check_word(rel.lhs, self.alphabet_size)
            check_word(rel.rhs, self.alphabet_size)
        if self.zero is not None and not 0 <= self.zero < self.alphabet_size:
            raise PresentationError(f"zero letter {self.zero} outside the alphabet")
        if self.letters is not None and len(self.letters) != self.alphabet_size:
            raise PresentationError("symbol table does not match alphabet size")

    @property
    def has_zero(self) -> bool:
        return self.zero is not None

    def letter_names(self) -> str:
        if self.letters is not None:
            return self.letters
        return default_letters(self.alphabet_size)

    def format_word(self, w: Sequence[int]) -> str:
        if not w:
            return EMPTY_WORD_LITERAL
        names = self.letter_names()
        return "".join(names[a] for a in w)

    def parse_word(self, text: str) -> Word:
        return _parse_word(text.strip(), {c: i for i, c in enumerate(self.letter_names())})

    def with_relations(self, relations: Iterable) -> "Presentation":
        return Presentation(self.alphabet_size, tuple(relations), self.zero, self.letters)


def default_letters(n: int) -> str:
    pool = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ023456789@#$%&*+"
    return pool[:n]


def check_word(w: Sequence[int], alphabet_size: int) -> None:
    for a in w:
        if not (isinstance(a, int) and 0 <= a < alphabet_size):
            raise PresentationError(f"letter {a!r} not in alphabet of size {alphabet_size}")


def reverse_word(w: Sequence[int]) -> Word:
    return tuple(reversed(w))


def reverse_presentation(p: Presentation, pairs: Sequence[Relation] = ()):
    """Reverse both sides of every relation and every generating pair.

    A left congruence containing ``pairs`` is the reverse of the right
    congruence generated by the reversed data, so left enumeration runs
    through the right-congruence machinery on the output of this function.
    """
    rp = p.with_relations(r.reversed() for r in p.relations)
    return rp, tuple(Relation(*s).reversed() for s in pairs)


def shortlex_key(w: Sequence[int], letter_order: Sequence[int] | None = None):
    if letter_order is None:
        return (len(w), tuple(w))
    rank = _rank(letter_order)
    return (len(w), tuple(rank[a] for a in w))


def shortlex_less(u: Sequence[int], v: Sequence[int], letter_order: Sequence[int] | None = None) -> bool:
    """Strict short-lex comparison; ``letter_order`` lists letters smallest first."""
    if len(u) != len(v):
        return len(u) < len(v)
    return shortlex_key(u, letter_order) < shortlex_key(v, letter_order)


def _rank(letter_order: Sequence[int]) -> list:
    rank = [0] * len(letter_order)
    for i, a in enumerate(letter_order):
        rank[a] = i
    if sorted(letter_order) != list(range(len(letter_order))):
        raise ValueError(f"letter order {list(letter_order)} is not a permutation")
    return rank


def _parse_word(text: str, symbols: dict, line: int | None = None) -> Word:
    if text == EMPTY_WORD_LITERAL:
        return ()
    if not text:
        raise PresentationError("empty word; write 1 for the empty word", line)
    if len(text) > MAX_WORD_LENGTH:
        raise PresentationError(f"word longer than {MAX_WORD_LENGTH}", line)
    try:
        return tuple(symbols[c] for c in text)
    except KeyError as e:
        raise PresentationError(f"undeclared letter {e.args[0]!r}", line) from None


def parse_presentation(text: str):
    """Parse the line-oriented presentation format.

    Returns ``(presentation, pairs, kind)``. Recognised lines are
    ``alphabet:``, ``relation: u = v``, ``pair: u = v``, ``kind:`` and
    ``zero:``; ``#`` starts a comment and ``1`` is the empty word.
    """
    alphabet = None
    zero_name = None
    kind = CongruenceKind.RIGHT
    pending = []  # (line number, target list, lhs text, rhs text)
    relations: list = []
    pairs: list = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise PresentationError(f"expected 'key: value', got {line!r}", lineno)
        key = key.strip().lower()
        value = value.strip()
        if key == "alphabet":
            if alphabet is not None:
                raise PresentationError("alphabet declared twice", lineno)
            letters = "".join(value.split())
            if not letters:
                raise PresentationError("empty alphabet", lineno)
            if len(set(letters)) != len(letters):
                raise PresentationError("repeated letter in alphabet", lineno)
            if EMPTY_WORD_LITERAL in letters:
                raise PresentationError("'1' is reserved for the empty word", lineno)
            if len(letters) > MAX_ALPHABET:
                raise PresentationError(f"more than {MAX_ALPHABET} letters", lineno)
            alphabet = letters
        elif key in ("relation", "pair"):
            lhs, eq, rhs = value.partition("=")
            if not eq or "=" in rhs:
                raise PresentationError(f"expected 'u = v', got {value!r}", lineno)
            pending.append((lineno, relations if key == "relation" else pairs, lhs.strip(), rhs.strip()))
        elif key == "kind":
            try:
                kind = CongruenceKind(value.lower())
            except ValueError:
                raise PresentationError(f"unknown kind {value!r}", lineno) from None
        elif key == "zero":
            if len(value) != 1 or value == EMPTY_WORD_LITERAL:
                raise PresentationError(f"zero must be a single letter, got {value!r}", lineno)
            zero_name = value
        else:
            raise PresentationError(f"unknown key {key!r}", lineno)

    if alphabet is None:
        raise PresentationError("empty alphabet: no 'alphabet:' line")
    if zero_name is not None and zero_name not in alphabet:
        alphabet += zero_name
        if len(alphabet) > MAX_ALPHABET:
            raise PresentationError(f"more than {MAX_ALPHABET} letters")
    symbols = {c: i for i, c in enumerate(alphabet)}
    for lineno, target, lhs, rhs in pending:
        target.append(Relation(_parse_word(lhs, symbols, lineno), _parse_word(rhs, symbols, lineno)))

    zero = symbols[zero_name] if zero_name is not None else None
    p = Presentation(len(alphabet), tuple(relations), zero, alphabet)
    return p, tuple(pairs), kind


def format_presentation(p: Presentation, pairs: Sequence[Relation] = (), kind=CongruenceKind.RIGHT) -> str:
    lines = [f"alphabet: {p.letter_names()}"]
    if p.zero is not None:
        lines.append(f"zero: {p.letter_names()[p.zero]}")
    lines += [f"relation: {p.format_word(r.lhs)} = {p.format_word(r.rhs)}" for r in p.relations]
    lines += [f"pair: {p.format_word(u)} = {p.format_word(v)}" for u, v in pairs]
    lines.append(f"kind: {CongruenceKind(kind).value}")
    return "\n".join(lines) + "\n"
