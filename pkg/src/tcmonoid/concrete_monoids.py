"""Concrete monoid elements, right Cayley graphs, and a brute-force
congruence oracle that shares no code with the enumerator."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .union_find import UnionFind
from .word_graph import WordGraph
from .words import CongruenceKind


@dataclass(frozen=True)
class BooleanMat:
    """Square matrix over the boolean semiring; rows stored as bit masks
    (bit ``j`` of ``rows[i]`` is entry ``(i, j)``)."""

    n: int
    rows: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("boolean matrices need degree at least 1")
        if len(self.rows) != self.n or any(not 0 <= r < (1 << self.n) for r in self.rows):
            raise ValueError("row masks do not fit the degree")

    @classmethod
    def parse(cls, text: str) -> "BooleanMat":
        """``"110;011;101"``: rows separated by ``;``, one digit per entry."""
        rows = [r.strip() for r in text.strip().split(";")]
        n = len(rows)
        masks = []
        for r in rows:
            if len(r) != n or set(r) - {"0", "1"}:
                raise ValueError(f"bad boolean matrix literal {text!r}")
            masks.append(sum(1 << j for j, c in enumerate(r) if c == "1"))
        return cls(n, tuple(masks))

    @classmethod
    def identity(cls, n: int) -> "BooleanMat":
        return cls(n, tuple(1 << i for i in range(n)))

    @property
    def degree(self) -> int:
        return self.n

    def __mul__(self, other: "BooleanMat") -> "BooleanMat":
        if other.n != self.n:
            raise ValueError("degree mismatch")
        out = []
        for r in self.rows:
            acc = 0
            j = 0
            while r:
                if r & 1:
                    acc |= other.rows[j]
                r >>= 1
                j += 1
            out.append(acc)
        return BooleanMat(self.n, tuple(out))

    def key(self) -> bytes:
        width = (self.n + 7) // 8
        return b"".join(r.to_bytes(width, "little") for r in self.rows)

    def one(self) -> "BooleanMat":
        return BooleanMat.identity(self.n)

    def __str__(self):
        return ";".join("".join("1" if r >> j & 1 else "0" for j in range(self.n)) for r in self.rows)


@dataclass(frozen=True)
class Transformation:
    """A map on ``0 .. n-1`` acting on the right: ``x(st) = (xs)t``."""

    images: tuple

    def __post_init__(self):
        n = len(self.images)
        if n < 1 or any(not 0 <= i < n for i in self.images):
            raise ValueError("images must lie in 0 .. n-1")

    @classmethod
    def parse(cls, text: str) -> "Transformation":
        """``"[1,0,2]"``."""
        body = text.strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"bad transformation literal {text!r}")
        return cls(tuple(int(x) for x in body[1:-1].split(",") if x.strip()))

    @classmethod
    def identity(cls, n: int) -> "Transformation":
        return cls(tuple(range(n)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __mul__(self, other: "Transformation") -> "Transformation":
        if other.degree != self.degree:
            raise ValueError("degree mismatch")
        t = other.images
        return Transformation(tuple(t[i] for i in self.images))

    def key(self) -> bytes:
        return bytes(self.images) if self.degree <= 256 else repr(self.images).encode()

    def one(self) -> "Transformation":
        return Transformation.identity(self.degree)

    def __str__(self):
        return "[" + ",".join(map(str, self.images)) + "]"


class CayleyLimitError(RuntimeError):
    pass


@dataclass
class CayleyResult:
    graph: WordGraph
    reps: list
    elements: list
    generators: tuple

    def __len__(self):
        return len(self.elements)

    def node_of(self, element) -> int:
        return self._index[element.key()]

    def __post_init__(self):
        self._index = {e.key(): i for i, e in enumerate(self.elements)}


def right_cayley(generators: Sequence, limit: int = 1 << 20) -> CayleyResult:
    """Breadth-first closure from the identity. Nodes are numbered in order
    of discovery, so each node's recorded word is its short-lex least one."""
    gens = tuple(generators)
    if not gens:
        raise ValueError("need at least one generator")
    if len({g.degree for g in gens}) != 1:
        raise ValueError("generators must share a degree")
    one = gens[0].one()
    elements = [one]
    reps = [()]
    index = {one.key(): 0}
    edges = []
    head = 0
    while head < len(elements):
        x = elements[head]
        for a, g in enumerate(gens):
            y = x * g
            key = y.key()
            t = index.get(key)
            if t is None:
                if len(elements) >= limit:
                    raise CayleyLimitError(f"more than {limit} elements")
                t = index[key] = len(elements)
                elements.append(y)
                reps.append(reps[head] + (a,))
            edges.append((head, a, t))
        head += 1
    g = WordGraph.from_edges(len(gens), edges, range(len(elements)))
    return CayleyResult(g, reps, elements, gens)


def _node(c: CayleyResult, w) -> int:
    x = 0
    for a in w:
        if not 0 <= a < len(c.generators):
            raise ValueError(f"letter {a} outside the generators")
        x = c.graph.target(x, a)
        if x is None:
            raise ValueError(f"word {tuple(w)} does not trace in the Cayley graph")
    return x


def congruence_closure_oracle(c: CayleyResult, pairs: Sequence, side="right") -> list:
    """Classes (sorted lists of nodes, ordered by minimum) of the least
    right, left or two-sided congruence containing ``pairs``.

    Pairs are closed under multiplication by generators on the chosen
    side(s); left multiplication uses the stored elements directly.
    """
    side = CongruenceKind(side)
    n = len(c.elements)
    k = len(c.generators)
    right = side in (CongruenceKind.RIGHT, CongruenceKind.TWOSIDED)
    left = side in (CongruenceKind.LEFT, CongruenceKind.TWOSIDED)
    fwd = [[c.graph.target(x, a) for a in range(k)] for x in range(n)]
    lft = None
    if left:
        lft = [[c.node_of(g * e) for g in c.generators] for e in c.elements]
    uf = UnionFind(n)
    todo = deque((_node(c, u), _node(c, v)) for u, v in pairs)
    while todo:
        x, y = todo.popleft()
        if not uf.union(x, y):
            continue
        for a in range(k):
            if right:
                todo.append((fwd[x][a], fwd[y][a]))
            if left:
                todo.append((lft[x][a], lft[y][a]))
    return uf.classes()


def example_boolean_monoid() -> CayleyResult:
    """The three 3x3 boolean matrices generating a 9-element monoid."""
    gens = [BooleanMat.parse(s) for s in ("110;011;101", "110;010;001", "101;110;011")]
    return right_cayley(gens)


__all__ = [
    "BooleanMat",
    "CayleyLimitError",
    "CayleyResult",
    "Transformation",
    "congruence_closure_oracle",
    "example_boolean_monoid",
    "right_cayley",
]
