"""Deterministic word graphs with a backward (source) index.

The forward table is a flat int32 array indexed by ``node * k + letter``
holding the target, or ``UNDEFINED``. The backward index is a set of
intrusive singly linked lists, one per ``(target, letter)``, threaded
through the same ``node * k + letter`` slots of the source: an edge
``(s, a, t)`` sits in the list headed at ``first[t * k + a]`` and
continues at ``next[s * k + a]``. Entries whose source has died are left in
place and skipped on traversal.

Arrays are over-allocated; ``_meta`` holds ``[next_id, active count]``.
Node ids are never reused; merging only shrinks the active set.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels as kern
from .union_find import UnionFind

UNDEFINED = -1
DEFAULT_MAX_NODES = 1 << 24
_MIN_CAPACITY = 16


class NodeLimitError(RuntimeError):
    """Raised when adding a node would exceed the configured cap."""


class FollowResult(NamedTuple):
    last_node: int
    prefix_len: int


class WordGraph:
    __slots__ = ("k", "max_nodes", "_fwd", "_first", "_next", "_alive", "_meta")

    def __init__(self, alphabet_size: int, max_nodes: int = DEFAULT_MAX_NODES, capacity: int = _MIN_CAPACITY):
        if alphabet_size < 0:
            raise ValueError("alphabet size must be non-negative")
        if max_nodes < 1:
            raise ValueError("node cap must be at least 1")
        self.k = alphabet_size
        self.max_nodes = max_nodes
        capacity = max(capacity, 1)
        self._fwd = np.full(capacity * alphabet_size, UNDEFINED, np.int32)
        self._first = np.full(capacity * alphabet_size, UNDEFINED, np.int32)
        self._next = np.full(capacity * alphabet_size, UNDEFINED, np.int32)
        self._alive = np.zeros(capacity, np.uint8)
        self._alive[0] = 1
        self._meta = np.array([1, 1], np.int64)

    @classmethod
    def trivial(cls, alphabet_size: int, max_nodes: int = DEFAULT_MAX_NODES) -> "WordGraph":
        return cls(alphabet_size, max_nodes)

    @classmethod
    def from_edges(cls, alphabet_size: int, edges: Iterable, nodes: Iterable | None = None,
                   max_nodes: int = DEFAULT_MAX_NODES) -> "WordGraph":
        """Build a graph keeping the given node ids; absent ids are dead."""
        edges = [tuple(int(x) for x in e) for e in edges]
        ids = {0}
        if nodes is not None:
            ids.update(int(x) for x in nodes)
        for s, _, t in edges:
            ids.add(s)
            ids.add(t)
        if min(ids) < 0:
            raise ValueError("negative node id")
        top = max(ids)
        g = cls(alphabet_size, max_nodes, capacity=top + 1)
        for x in ids:
            g._alive[x] = 1
        g._meta[0] = top + 1
        g._meta[1] = len(ids)
        for s, a, t in edges:
            g.add_edge(s, a, t)
        return g

    # -- size and membership --------------------------------------------

    @property
    def alphabet_size(self) -> int:
        return self.k

    @property
    def next_id(self) -> int:
        return int(self._meta[0])

    @property
    def num_nodes(self) -> int:
        return int(self._meta[1])

    @property
    def capacity(self) -> int:
        return self._alive.shape[0]

    def __len__(self):
        return self.num_nodes

    def is_active(self, node: int) -> bool:
        return 0 <= node < self.next_id and bool(self._alive[node])

    def nodes(self) -> list:
        return np.flatnonzero(self._alive[: self.next_id]).tolist()

    def reserve(self, count: int) -> None:
        """Make room for ``count`` node ids in total."""
        cap = self.capacity
        if count <= cap:
            return
        new_cap = max(count, 2 * cap)
        k = self.k
        for name in ("_fwd", "_first", "_next"):
            old = getattr(self, name)
            arr = np.full(new_cap * k, UNDEFINED, np.int32)
            arr[: old.shape[0]] = old
            setattr(self, name, arr)
        alive = np.zeros(new_cap, np.uint8)
        alive[:cap] = self._alive
        self._alive = alive

    def add_node(self) -> int:
        if self.num_nodes >= self.max_nodes:
            raise NodeLimitError(f"node limit {self.max_nodes} reached")
        node = self.next_id
        self.reserve(node + 1)
        self._alive[node] = 1
        self._meta[0] += 1
        self._meta[1] += 1
        return node

    def _check_active(self, node: int) -> None:
        if not self.is_active(node):
            raise ValueError(f"node {node} is not active")

    # -- edges ----------------------------------------------------------

    def add_edge(self, src: int, letter: int, tgt: int) -> None:
        self._check_active(src)
        self._check_active(tgt)
        if not 0 <= letter < self.k:
            raise ValueError(f"letter {letter} outside alphabet of size {self.k}")
        if self._fwd[src * self.k + letter] != UNDEFINED:
            raise ValueError(f"node {src} already has an edge labelled {letter}")
        self._link(src, letter, tgt)

    def _link(self, src: int, letter: int, tgt: int) -> None:
        kern.link(self._fwd, self._first, self._next, self.k, src, letter, tgt)

    def target(self, node: int, letter: int) -> int | None:
        t = int(self._fwd[node * self.k + letter])
        return None if t == UNDEFINED else t

    def sources(self, node: int, letter: int) -> list:
        """Active nodes with an edge labelled ``letter`` into ``node``."""
        k = self.k
        fwd, nxt, alive = self._fwd, self._next, self._alive
        out = []
        s = int(self._first[node * k + letter])
        while s != UNDEFINED:
            if alive[s] and fwd[s * k + letter] == node:
                out.append(s)
            s = int(nxt[s * k + letter])
        return out

    def edges(self):
        k = self.k
        n = self.next_id
        fwd = self._fwd[: n * k].tolist()
        alive = self._alive
        for s in range(n):
            if alive[s]:
                base = s * k
                for a in range(k):
                    t = fwd[base + a]
                    if t != UNDEFINED:
                        yield s, a, t

    def num_edges(self) -> int:
        n = self.next_id
        if self.k == 0:
            return 0
        rows = self._fwd[: n * self.k].reshape(n, self.k)[self._alive[:n] == 1]
        return int(np.count_nonzero(rows != UNDEFINED))

    def follow(self, start: int, word: Sequence[int]) -> FollowResult:
        k, fwd = self.k, self._fwd
        node = start
        for i, a in enumerate(word):
            t = int(fwd[node * k + a])
            if t == UNDEFINED:
                return FollowResult(node, i)
            node = t
        return FollowResult(node, len(word))

    def path_target(self, start: int, word: Sequence[int]) -> int | None:
        """Target of the full path labelled ``word``, or ``None`` if it stops early."""
        node, n = self.follow(start, word)
        return node if n == len(word) else None

    # -- predicates -----------------------------------------------------

    def is_complete(self) -> bool:
        n = self.next_id
        if self.k == 0:
            return True
        rows = self._fwd[: n * self.k].reshape(n, self.k)[self._alive[:n] == 1]
        return not bool((rows == UNDEFINED).any())

    def is_deterministic(self) -> bool:
        # one target slot per (node, letter); only the table's integrity can fail
        n = self.next_id
        if self.k == 0:
            return True
        rows = self._fwd[: n * self.k].reshape(n, self.k)[self._alive[:n] == 1]
        targets = rows[rows != UNDEFINED]
        return bool(((targets < n) & (self._alive[np.minimum(targets, n - 1)] == 1)).all())

    def is_compatible(self, relations: Iterable) -> bool:
        letters, ridx = encode_relations(relations)
        return bool(kern.is_compatible(self._fwd, self._alive, self.next_id, self.k, letters, ridx))

    def reachable(self, start: int = 0) -> set:
        k = self.k
        fwd = self._fwd
        seen = {start}
        todo = [start]
        while todo:
            s = todo.pop()
            for t in fwd[s * k:(s + 1) * k].tolist():
                if t != UNDEFINED and t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    def check_invariants(self) -> None:
        """Assert forward/backward consistency; for tests and debugging."""
        k = self.k
        for s, a, t in self.edges():
            assert self._alive[t], f"edge ({s},{a},{t}) into dead node"
            assert s in self.sources(t, a), f"edge ({s},{a},{t}) missing from backward index"
        for t in self.nodes():
            for a in range(k):
                for s in self.sources(t, a):
                    assert self._fwd[s * k + a] == t

    # -- copying and comparison -------------------------------------------

    def copy(self) -> "WordGraph":
        n = self.next_id
        g = WordGraph(self.k, self.max_nodes, capacity=n)
        g._fwd[: n * self.k] = self._fwd[: n * self.k]
        g._first[: n * self.k] = self._first[: n * self.k]
        g._next[: n * self.k] = self._next[: n * self.k]
        g._alive[:n] = self._alive[:n]
        g._meta[:] = self._meta
        return g

    def table(self) -> dict:
        """``{node: (target or None, ...)}`` over active nodes."""
        k = self.k
        fwd = self._fwd[: self.next_id * k].tolist()
        return {
            s: tuple(None if t == UNDEFINED else t for t in fwd[s * k:(s + 1) * k])
            for s in self.nodes()
        }

    def forward_table(self) -> np.ndarray:
        """Active rows of the forward table as an ``(n, k)`` array (ids as stored)."""
        n = self.next_id
        return self._fwd[: n * self.k].reshape(n, self.k)[self._alive[:n] == 1].copy()

    def __eq__(self, other):
        if not isinstance(other, WordGraph):
            return NotImplemented
        return self.k == other.k and self.table() == other.table()

    __hash__ = None

    def __repr__(self):
        return f"WordGraph(alphabet_size={self.k}, nodes={self.num_nodes}, edges={self.num_edges()})"

    # -- merging ----------------------------------------------------------

    def merge_nodes(self, keep: int, drop: int, coincidences: list, deductions: list | None = None) -> None:
        """Identify ``drop`` with ``keep`` and kill ``drop``.

        Edges into ``drop`` are redirected to ``keep``; edges out of ``drop``
        move to ``keep`` where it has none, and otherwise the pair of targets
        is appended to ``coincidences``. Every edge that appears in the graph
        as a result is recorded in ``deductions`` if given.
        """
        self._check_active(keep)
        self._check_active(drop)
        k = self.k
        regs = kern.new_regs(k)
        regs[kern.TRACK] = 1
        parent = np.arange(self.next_id, dtype=np.int32)
        coinc = np.empty(2 * k + 2, np.int64)
        indegree = sum(len(self.sources(drop, a)) for a in range(k))
        ded = np.empty(2 * (indegree + k) + 2, np.int64)
        kern.merge_nodes(self._fwd, self._first, self._next, self._alive, self._meta, parent, regs,
                         coinc, ded, keep, drop)
        coincidences.extend(kern.pairs(coinc, regs[kern.CSP]))
        if deductions is not None:
            deductions.extend(kern.pairs(ded, regs[kern.DSP]))

    def rebuild_backward(self) -> None:
        kern.rebuild_backward(self._fwd, self._first, self._next, self._alive, self.next_id, self.k)

    def _renumber(self, order: np.ndarray) -> None:
        """Keep only the nodes in ``order`` (old ids, ``order[0] == 0``), renamed to their positions."""
        k = self.k
        m = order.shape[0]
        fwd = kern.relabel_table(self._fwd, k, order, self.next_id)
        self._fwd = fwd if m * k else np.zeros(0, np.int32)
        self._first = np.full(m * k, UNDEFINED, np.int32)
        self._next = np.full(m * k, UNDEFINED, np.int32)
        self._alive = np.ones(m, np.uint8)
        self._meta[0] = m
        self._meta[1] = m
        self.rebuild_backward()

    def relabel(self, mapping: dict) -> None:
        """Rename active nodes by ``mapping`` (a bijection onto 0..n-1 with 0 -> 0)."""
        n = self.num_nodes
        if sorted(mapping.values()) != list(range(n)) or mapping.get(0) != 0:
            raise ValueError("mapping must be a bijection onto 0..n-1 fixing 0")
        if set(mapping) != set(self.nodes()):
            raise ValueError("mapping must cover exactly the active nodes")
        order = np.empty(n, np.int64)
        for old, new in mapping.items():
            order[new] = old
        self._renumber(order)


def encode_relations(relations: Iterable):
    """Concatenated letters plus an ``(r, 4)`` table of (lhs start, lhs length,
    rhs start, rhs length), the layout the compiled kernels expect."""
    letters: list = []
    rows = []
    for rel in relations:
        u, v = (tuple(x) for x in rel)
        rows.append((len(letters), len(u), len(letters) + len(u), len(v)))
        letters.extend(u)
        letters.extend(v)
    return (np.array(letters, np.int64), np.array(rows, np.int64).reshape(len(rows), 4))


# -- whole-graph operations ---------------------------------------------------


def quotient(g: WordGraph, partition: UnionFind):
    """The quotient of ``g`` by ``partition`` with class minima as node ids.

    Where the quotient would have two targets for one ``(node, letter)``,
    the first target (in source order) is stored and every other one is
    returned paired with it as a new coincidence ``(min, max)``.
    """
    find = partition.find
    k = g.k
    reps = sorted({find(x) for x in g.nodes()})
    q = WordGraph.from_edges(k, (), nodes=reps, max_nodes=g.max_nodes)
    pending = set()
    for s, a, t in g.edges():
        rs, rt = find(s), find(t)
        cur = q.target(rs, a)
        if cur is None:
            q._link(rs, a, rt)
        elif cur != rt:
            pending.add((min(cur, rt), max(cur, rt)))
    return q, sorted(pending)


def _order_of(g: WordGraph, order: str, letter_order) -> np.ndarray:
    k = g.k
    letters = list(range(k)) if letter_order is None else [int(a) for a in letter_order]
    if sorted(letters) != list(range(k)):
        raise ValueError(f"letter order {letters} is not a permutation of the alphabet")
    if order == "shortlex":
        return kern.bfs_order(g._fwd, g.next_id, k, np.array(letters, np.int64))
    if order == "lex":
        fwd = g._fwd[: g.next_id * k].tolist()
        out = []
        seen = {0}
        stack = [0]
        while stack:
            s = stack.pop()
            out.append(s)
            for a in reversed(letters):
                t = fwd[s * k + a]
                if t != UNDEFINED and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return np.array(out, np.int64)
    raise ValueError(f"unsupported standardization order {order!r}")


def standardize(g: WordGraph, order: str = "shortlex", letter_order: Sequence[int] | None = None) -> dict:
    """Relabel ``g`` in place so that node ids follow the least word reaching
    each node; returns the ``{old: new}`` mapping.

    ``shortlex`` numbers nodes in breadth-first order, which is the order
    of their short-lex least access words. ``lex`` numbers nodes in
    depth-first preorder, the lexicographic analogue (lexicographic order
    has no least elements in general, so first-visit order is used).
    Nodes unreachable from 0 are dropped.
    """
    seq = _order_of(g, order, letter_order)
    mapping = {int(old): i for i, old in enumerate(seq.tolist())}
    g._renumber(seq)
    return mapping


def standardized(g: WordGraph, order: str = "shortlex", letter_order=None) -> WordGraph:
    h = g.copy()
    standardize(h, order, letter_order)
    return h


def isomorphic(g1: WordGraph, g2: WordGraph) -> bool:
    """Isomorphism test for complete deterministic graphs rooted at 0."""
    for g in (g1, g2):
        if not g.is_complete():
            raise ValueError("isomorphism test needs complete word graphs")
    if g1.k != g2.k or g1.num_nodes != g2.num_nodes:
        return False
    h1, h2 = standardized(g1), standardized(g2)
    return h1.num_nodes == h2.num_nodes and bool(np.array_equal(h1._fwd, h2._fwd))


def to_dot(g: WordGraph, labels: dict | Sequence | None = None, letters: str | None = None) -> str:
    """DOT digraph text; one edge per (source, letter, target)."""
    out = ["digraph WordGraph {", "  node [shape=circle];"]
    for x in g.nodes():
        if labels is not None and (x in labels if isinstance(labels, dict) else x < len(labels)):
            out.append(f'  {x} [label="{x}\\n{labels[x]}"];')
        else:
            out.append(f'  {x} [label="{x}"];')
    for s, a, t in g.edges():
        name = letters[a] if letters is not None else str(a)
        out.append(f'  {s} -> {t} [label="{name}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def to_csv(g: WordGraph) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["source", "letter", "target"])
    w.writerows(g.edges())
    return buf.getvalue()


def from_csv(text: str, alphabet_size: int) -> WordGraph:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["source", "letter", "target"]:
        raise ValueError("expected a 'source,letter,target' header")
    edges = [tuple(int(x) for x in row) for row in rows[1:] if row]
    return WordGraph.from_edges(alphabet_size, edges)
