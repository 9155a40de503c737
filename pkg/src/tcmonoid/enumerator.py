"""Congruence enumeration sessions: the TC1/TC2/TC3 steps and the HLT,
Felsch, modified Felsch and alternating strategies built from them.

A session owns one word graph, the union-find of pending identifications,
the coincidence stack and the deduction stack. The loops themselves run in
``_kernels``; this module keeps the state, grows the arrays between macro
steps, and turns a finished graph into an ``EnumerationResult``.

Every strategy ends with the same check: the graph is complete, every
relation holds at every node, and every generating pair holds at node 0.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels as kern
from .felsch_tree import FelschTree
from .word_graph import (
    DEFAULT_MAX_NODES,
    UNDEFINED,
    NodeLimitError,
    WordGraph,
    encode_relations,
    standardize,
)
from .words import (
    CongruenceKind,
    Presentation,
    Relation,
    check_word,
    reverse_presentation,
    reverse_word,
    shortlex_key,
)

DEFAULT_DEDUCTION_CAP = 1 << 20


class Status(str, enum.Enum):
    COMPLETE = "complete"
    NODE_LIMIT = "node_limit"
    STEP_LIMIT = "step_limit"


class Tc2Outcome(enum.Enum):
    EDGE_DEFINED = "edge_defined"
    COINCIDENCE_RECORDED = "coincidence_recorded"
    INCOMPLETE = "incomplete"
    ALREADY_COMPATIBLE = "already_compatible"


_OUTCOMES = (
    Tc2Outcome.EDGE_DEFINED,
    Tc2Outcome.COINCIDENCE_RECORDED,
    Tc2Outcome.INCOMPLETE,
    Tc2Outcome.ALREADY_COMPATIBLE,
)

_STATUS = {kern.NODE_LIMIT: Status.NODE_LIMIT, kern.STEP_LIMIT: Status.STEP_LIMIT}


class IncompleteResultError(RuntimeError):
    """Class queries on a result that did not complete."""


@dataclass(frozen=True)
class EnumerationResult:
    status: Status
    graph: WordGraph
    num_classes: int | None
    stats: dict
    kind: CongruenceKind = CongruenceKind.RIGHT
    alphabet_size: int = 0
    zero_class: int | None = None
    order: str = "shortlex"
    letter_order: tuple | None = None

    @property
    def complete(self) -> bool:
        return self.status is Status.COMPLETE

    def _require_complete(self):
        if not self.complete:
            raise IncompleteResultError(f"enumeration stopped with status {self.status.value}")

    def class_of(self, w: Sequence[int]) -> int:
        self._require_complete()
        w = tuple(w)
        check_word(w, self.alphabet_size)
        if self.kind is CongruenceKind.LEFT:
            w = reverse_word(w)
        return self.graph.path_target(0, w)

    def contains(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.class_of(u) == self.class_of(v)

    def normal_forms(self) -> list:
        """Short-lex least word of every class, indexed by class."""
        self._require_complete()
        if self.kind is CongruenceKind.LEFT:
            return _left_normal_forms(self.graph, self.letter_order)
        return _bfs_words(self.graph, self.letter_order)


def _bfs_words(g: WordGraph, letter_order=None) -> list:
    k = g.k
    letters = range(k) if letter_order is None else letter_order
    fwd = g._fwd[: g.next_id * k].tolist()
    words = {0: ()}
    todo = deque([0])
    while todo:
        s = todo.popleft()
        for a in letters:
            t = fwd[s * k + a]
            if t != UNDEFINED and t not in words:
                words[t] = words[s] + (a,)
                todo.append(t)
    return [words[x] for x in sorted(words)]


def _left_normal_forms(g: WordGraph, letter_order=None) -> list:
    # the graph is for the reversed congruence: the class of x is the node
    # reached by x reversed, so build the least x letter by letter from the
    # target backwards
    k = g.k
    letters = list(range(k)) if letter_order is None else list(letter_order)
    fwd = g._fwd[: g.next_id * k].tolist()
    dist = {0: 0}
    todo = deque([0])
    while todo:
        s = todo.popleft()
        for a in range(k):
            t = fwd[s * k + a]
            if t != UNDEFINED and t not in dist:
                dist[t] = dist[s] + 1
                todo.append(t)
    out = []
    for node in sorted(dist):
        level = {node}
        word = []
        for remaining in range(dist[node], 0, -1):
            for a in letters:
                prev = {p for x in level for p in g.sources(x, a) if dist.get(p) == remaining - 1}
                if prev:
                    word.append(a)
                    level = prev
                    break
        out.append(tuple(word))
    return out


def _as_relation(s) -> Relation:
    return s if isinstance(s, Relation) else Relation(tuple(s[0]), tuple(s[1]))


class Session:
    """A single congruence enumeration.

    Construction performs the two fixed opening steps: for every generating
    pair ``(u, v)`` paths labelled ``u`` and ``v`` are defined from node 0,
    then TC2 is applied to node 0 and the pair. Any coincidences found are
    left queued; the strategy drivers process them first.
    """

    # coincidence stack slots per node of capacity; past that, pairs go
    # straight into the partition until the stack is doubled (see _kernels)
    _coinc_factor = 1
    # initial length of the deduction search stack; it doubles on demand
    _work_size = 1 << 12

    def __init__(
        self,
        presentation: Presentation,
        pairs: Sequence = (),
        kind: CongruenceKind | str = CongruenceKind.RIGHT,
        start: WordGraph | None = None,
        *,
        max_nodes: int = DEFAULT_MAX_NODES,
        max_steps: int | None = None,
        deduction_cap: int = DEFAULT_DEDUCTION_CAP,
    ):
        kind = CongruenceKind(kind)
        pairs = tuple(_as_relation(s) for s in pairs)
        for s in pairs:
            check_word(s.lhs, presentation.alphabet_size)
            check_word(s.rhs, presentation.alphabet_size)
        if max_nodes < 1:
            raise ValueError("node cap must be at least 1")
        if deduction_cap < 1:
            raise ValueError("deduction cap must be at least 1")
        self.presentation = presentation
        self.kind = kind
        self.original_pairs = pairs
        if kind is CongruenceKind.LEFT:
            if start is not None:
                raise ValueError("a start graph acts on the right; it cannot seed a left congruence")
            presentation, pairs = reverse_presentation(presentation, pairs)
        relations = tuple(presentation.relations)
        if kind is CongruenceKind.TWOSIDED:
            relations += pairs
            pairs = ()
        self.relations = relations
        self.pairs = pairs
        self.alphabet_size = k = presentation.alphabet_size
        self.zero = presentation.zero
        self._letters, self._ridx = encode_relations(relations)
        self._tree: FelschTree | None = None
        self._tree_arrays = None
        self._dirty = None
        self._later = None
        total = sum(len(u) + len(v) for u, v in relations)
        self._hlt_headroom = total + k + 2
        self._stephen_headroom = total + 2

        if start is not None:
            if start.k != k:
                raise ValueError("start graph alphabet does not match the presentation")
            if not start.is_active(0) or not start.is_deterministic():
                raise ValueError("start graph must be deterministic and contain node 0")
            if self.zero is not None:
                raise ValueError("start graphs are not supported for presentations with zero")
            if start.num_nodes > max_nodes:
                raise NodeLimitError(f"start graph already has more than {max_nodes} nodes")
            self.graph = start.copy()
            self.graph.max_nodes = max_nodes
        else:
            self.graph = WordGraph(k, max_nodes)
        self.parent = np.arange(self.graph.capacity, dtype=np.int32)
        self.regs = regs = kern.new_regs(k)
        regs[kern.MAX_NODES] = max_nodes
        regs[kern.MAX_STEPS] = -1 if max_steps is None else max_steps
        regs[kern.ZERO] = -1 if self.zero is None else self.zero
        regs[kern.TRACK] = 1
        regs[kern.PEAK] = self.graph.num_nodes
        # a start graph needs one exhaustive scan before deductions suffice
        regs[kern.OVERFLOW] = int(start is not None and self.graph.num_edges() > 0)
        self.deduction_cap = deduction_cap
        self._ded = np.empty(2 * deduction_cap, np.int64)
        self._coinc = np.empty(self._coinc_size(), np.int64)
        self._work = np.empty(self._work_size, np.int64)

        if self.zero is not None:
            if self.graph.num_nodes >= max_nodes:
                raise NodeLimitError(f"node limit {max_nodes} reached")
            omega = self.graph.add_node()
            self._reserve(omega + 1)
            for a in range(k):
                self.graph._link(omega, a, omega)
            self.graph._link(0, self.zero, omega)
            regs[kern.OMEGA] = omega
            regs[kern.PEAK] = self.graph.num_nodes

        self._reserve(self.graph.next_id + sum(len(s.lhs) + len(s.rhs) for s in pairs) + 2)
        for s in pairs:
            self._trace_define(0, s.lhs)
            self._trace_define(0, s.rhs)
        for s in pairs:
            self._tc2_words(0, s.lhs, s.rhs)

    # -- state -------------------------------------------------------------

    @property
    def max_nodes(self) -> int:
        return int(self.regs[kern.MAX_NODES])

    @property
    def max_steps(self) -> int | None:
        v = int(self.regs[kern.MAX_STEPS])
        return None if v < 0 else v

    @max_steps.setter
    def max_steps(self, value: int | None) -> None:
        self.regs[kern.MAX_STEPS] = -1 if value is None else value

    @property
    def omega(self) -> int | None:
        v = int(self.regs[kern.OMEGA])
        return None if v < 0 else v

    @property
    def coincidences(self) -> list:
        """Queued coincidence pairs, oldest first."""
        return kern.pairs(self._coinc, self.regs[kern.CSP])

    @property
    def deductions(self) -> list:
        """The deduction stack, bottom first."""
        return kern.pairs(self._ded, self.regs[kern.DSP])

    @property
    def stats(self) -> dict:
        r = self.regs
        out = {
            "tc1": int(r[kern.TC1]),
            "tc2": int(r[kern.TC2]),
            "tc3": int(r[kern.TC3]),
            "tc3_passes": int(r[kern.TC3_PASSES]),
            "deductions": int(r[kern.DEDUCTIONS]),
            "sweeps": int(r[kern.SWEEPS]),
            "peak_nodes": int(r[kern.PEAK]),
        }
        out["steps"] = out["tc1"] + out["tc2"] + out["tc3"]
        out["nodes_defined"] = out["tc1"]
        out["active_nodes"] = self.graph.num_nodes
        out["ids_issued"] = self.graph.next_id
        return out

    def find(self, x: int) -> int:
        return int(kern.find(self.parent, x))

    @property
    def felsch_tree(self) -> FelschTree:
        if self._tree is None:
            self._tree = FelschTree(self.alphabet_size, self.relations)
            self._tree_arrays = self._tree.arrays()
        return self._tree

    def _coinc_size(self) -> int:
        return max(2, self._coinc_factor * 2 * (self.alphabet_size + 1) * self.graph.capacity)

    def _reserve(self, count: int) -> None:
        g = self.graph
        old = self.parent.shape[0]
        g.reserve(count)
        cap = g.capacity
        if cap != old:
            parent = np.arange(cap, dtype=np.int32)
            parent[:old] = self.parent
            self.parent = parent
            size = self._coinc_size()
            if size > self._coinc.shape[0]:
                coinc = np.empty(size, np.int64)
                used = self.regs[kern.CSP]
                coinc[:used] = self._coinc[:used]
                self._coinc = coinc
            if self._dirty is not None:
                size = cap * len(self.relations)
                dirty = np.zeros(size, np.uint8)
                dirty[: self._dirty.shape[0]] = self._dirty
                self._dirty = dirty
                heap = np.empty(size, np.int64)
                heap[: self._qsz[0]] = self._heap[: self._qsz[0]]
                self._heap = heap
                later = np.empty(size, np.int64)
                later[: self._qsz[1]] = self._later[: self._qsz[1]]
                self._later = later

    def _g(self):
        g = self.graph
        return g._fwd, g._first, g._next, g._alive, g._meta, self.parent, self.regs

    def _tree_args(self):
        self.felsch_tree
        return self._tree_arrays + (self._work,)

    # -- primitive steps -------------------------------------------------

    def tc1(self, node: int, letter: int) -> int:
        """Define a fresh node as the target of ``(node, letter)``."""
        g = self.graph
        if not g.is_active(node):
            raise ValueError(f"node {node} is not active")
        if not 0 <= letter < g.k:
            raise ValueError(f"letter {letter} outside the alphabet")
        if g._fwd[node * g.k + letter] != UNDEFINED:
            raise ValueError(f"node {node} already has an edge labelled {letter}")
        self._reserve(g.next_id + 1)
        new = kern.tc1(*self._g(), self._ded, node, letter)
        if new < 0:
            raise NodeLimitError(f"node limit {self.max_nodes} reached")
        return int(new)

    def tc2(self, node: int, relation) -> Tc2Outcome:
        """Follow both sides of ``relation`` (an index into the relations,
        or a pair of words) from ``node``."""
        if not self.graph.is_active(node):
            raise ValueError(f"node {node} is not active")
        if isinstance(relation, (int, np.integer)):
            u, v = self.relations[relation]
        else:
            u, v = _as_relation(relation)
            check_word(u, self.alphabet_size)
            check_word(v, self.alphabet_size)
        code = self._tc2_words(node, u, v)
        self._check_work()
        return _OUTCOMES[code]

    def _tc2_words(self, node, u, v) -> int:
        letters = np.array(tuple(u) + tuple(v), np.int64)
        g = self.graph
        return kern.tc2(g._fwd, g._first, g._next, self.parent, self.regs, self._coinc, self._ded, letters,
                        0, len(u), len(u), len(v), node)

    def tc3(self) -> int:
        """Process all queued coincidences; returns the number of merges."""
        return int(kern.tc3(*self._g(), self._coinc, self._ded))

    def _trace_define(self, node: int, word) -> int:
        letters = np.array(tuple(word), np.int64)
        x = kern.trace_define(*self._g(), self._ded, node, letters, 0, len(letters))
        if x < 0:
            raise NodeLimitError(f"node limit {self.max_nodes} reached")
        return int(x)

    def process_deductions(self) -> Status | None:
        """Drain the deduction stack with the subword-tree backtrack search,
        identifying coincidences after each deduction. Returns a limit status
        if the step limit stopped it."""
        code = kern.process_deductions(*self._g(), self._coinc, self._ded, self._letters, self._ridx,
                                       *self._tree_args())
        self._check_work()
        return _STATUS.get(code)

    def sweep(self) -> bool:
        """TC2 at every active node for every relation; True if anything changed."""
        g = self.graph
        changed = kern.sweep_all(g._fwd, g._first, g._next, g._alive, g._meta, self.parent, self.regs,
                                 self._coinc, self._ded, self._letters, self._ridx)
        self._check_work()
        return bool(changed)

    # -- strategies -----------------------------------------------------------

    def _check_work(self) -> bool:
        # a compiled loop ran short of stack and fell back to a slow path
        grew = False
        if self.regs[kern.WORK_FULL]:
            self.regs[kern.WORK_FULL] = 0
            self._work = np.empty(2 * len(self._work), np.int64)
            grew = True
        if self.regs[kern.COINC_FULL]:
            self.regs[kern.COINC_FULL] = 0
            coinc = np.empty(2 * len(self._coinc), np.int64)
            used = self.regs[kern.CSP]
            coinc[:used] = self._coinc[:used]
            self._coinc = coinc
            grew = True
        return grew

    def _drive(self, call, headroom: int, order, letter_order) -> EnumerationResult:
        while True:
            self._reserve(self.graph.next_id + headroom)
            code = call()
            grew = self._check_work()
            if code != kern.GROW:
                break
            if not grew:
                self._reserve(2 * self.graph.capacity)
        if code == kern.DONE:
            return self._result(Status.COMPLETE, order, letter_order)
        return self._result(_STATUS[code])

    def run_hlt(self, order: str = "shortlex", letter_order=None) -> EnumerationResult:
        self.regs[kern.TRACK] = 0
        self.regs[kern.DSP] = 0
        headroom = self._hlt_headroom

        def call():
            return kern.hlt_run(*self._g(), self._coinc, self._ded, self._letters, self._ridx, headroom)

        return self._drive(call, headroom, order, letter_order)

    def run_felsch(self, modified: bool = False, order: str = "shortlex", letter_order=None,
                   full_sweeps: bool = False) -> EnumerationResult:
        """Felsch strategy; ``modified`` drives TC2 from the deduction stack.

        Plain Felsch applies TC2 to every node and relation after each
        definition. By default pairs whose previous application changed
        nothing, and whose paths have gained no edge since, are skipped,
        which leaves every intermediate graph unchanged. ``full_sweeps``
        applies TC2 literally everywhere (quadratic; for cross-checks).
        """
        if modified:
            self.regs[kern.TRACK] = 1

            def call():
                return kern.felsch_modified_run(*self._g(), self._coinc, self._ded, self._letters,
                                                self._ridx, *self._tree_args())
        elif full_sweeps:
            self.regs[kern.TRACK] = 0
            self.regs[kern.DSP] = 0
            self.tc3()

            def call():
                return kern.felsch_naive_run(*self._g(), self._coinc, self._ded, self._letters, self._ridx)
        else:
            self.regs[kern.TRACK] = 1
            self._start_flags()

            def call():
                return kern.felsch_plain_run(*self._g(), self._coinc, self._ded, self._letters, self._ridx,
                                             *self._tree_args(), self._dirty, self._heap, self._later, self._qsz)

        return self._drive(call, 4, order, letter_order)

    def _start_flags(self, by_node=False):
        if self._dirty is not None:
            return
        nrel = len(self.relations)
        size = self.graph.capacity * nrel
        self._dirty = np.zeros(size, np.uint8)
        self._heap = np.empty(size, np.int64)
        self._later = np.empty(size, np.int64)
        # heap size, later size, and the cursor of Stephen's sweeps
        self._qsz = np.zeros(3, np.int64)
        for node in self.graph.nodes():
            if by_node:
                kern.stephen_flag_node(self._dirty, self._later, self._qsz, nrel, node)
            else:
                kern.mark_node(self._dirty, self._heap, self._later, self._qsz, nrel, node)
        # every pair is flagged, so the pending deductions add nothing
        self.regs[kern.DSP] = 0
        self.tc3()
        self.regs[kern.DSP] = 0

    def run_alternating(self, hlt_steps: int, felsch_steps: int, order: str = "shortlex",
                        letter_order=None) -> EnumerationResult:
        """Alternate ``hlt_steps`` HLT node steps with ``felsch_steps``
        Felsch definitions (each followed by deduction processing)."""
        if hlt_steps < 1 or felsch_steps < 1:
            raise ValueError("alternation periods must both be at least 1")
        self.regs[kern.TRACK] = 1
        headroom = self._hlt_headroom
        code = self.process_deductions()
        if code is not None:
            return self._result(code)

        def call():
            return kern.alternating_run(*self._g(), self._coinc, self._ded, self._letters, self._ridx,
                                        *self._tree_args(), hlt_steps, felsch_steps, headroom)

        return self._drive(call, headroom, order, letter_order)

    def run(self, strategy: str = "hlt", order: str = "shortlex", letter_order=None) -> EnumerationResult:
        name, args = parse_strategy(strategy)
        if name == "hlt":
            return self.run_hlt(order, letter_order)
        if name == "felsch":
            return self.run_felsch(False, order, letter_order)
        if name == "felsch-mod":
            return self.run_felsch(True, order, letter_order)
        return self.run_alternating(*args, order=order, letter_order=letter_order)

    # -- termination ----------------------------------------------------------

    def is_finished(self) -> bool:
        """Complete, compatible with every relation, generating pairs hold at 0."""
        g = self.graph
        if self.regs[kern.CSP] or self.regs[kern.LAZY] or not g.is_complete():
            return False
        if not g.is_compatible(self.relations):
            return False
        return all(g.path_target(0, s.lhs) == g.path_target(0, s.rhs) for s in self.pairs)

    def _result(self, status: Status, order: str = "shortlex", letter_order=None) -> EnumerationResult:
        kw = dict(kind=self.kind, alphabet_size=self.alphabet_size, stats=self.stats)
        if status is not Status.COMPLETE:
            return EnumerationResult(status, self.graph.copy(), None, **kw)
        if not self.is_finished():
            raise RuntimeError("enumeration stopped before reaching a compatible complete graph")
        g = self.graph.copy()
        mapping = standardize(g, order, letter_order)
        if self.kind is CongruenceKind.LEFT and order == "shortlex":
            # the graph orders classes by reversed words; renumber them by
            # their own least words instead
            forms = _left_normal_forms(g, letter_order)
            ranked = sorted(range(len(forms)), key=lambda i: shortlex_key(forms[i], letter_order))
            perm = {old: new for new, old in enumerate(ranked)}
            g.relabel(perm)
            mapping = {x: perm[y] for x, y in mapping.items()}
        zero_class = None
        if self.omega is not None:
            zero_class = mapping[self.find(self.omega)]
        return EnumerationResult(
            status, g, g.num_nodes, zero_class=zero_class, order=order,
            letter_order=None if letter_order is None else tuple(letter_order), **kw,
        )


def parse_strategy(strategy: str):
    s = strategy.strip().lower()
    if s in ("hlt", "felsch", "felsch-mod"):
        return s, ()
    if s.startswith("alt:"):
        try:
            h, f = (int(x) for x in s[4:].split(","))
        except ValueError:
            raise ValueError(f"bad alternation strategy {strategy!r}; expected alt:<h>,<f>") from None
        if h < 1 or f < 1:
            raise ValueError("alternation periods must both be at least 1")
        return "alt", (h, f)
    raise ValueError(f"unknown strategy {strategy!r}")


def enumerate_congruence(
    presentation: Presentation,
    pairs: Sequence = (),
    kind: CongruenceKind | str = CongruenceKind.RIGHT,
    strategy: str = "hlt",
    *,
    start: WordGraph | None = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    max_steps: int | None = None,
    order: str = "shortlex",
    letter_order=None,
) -> EnumerationResult:
    """One-shot enumeration: build a session and run ``strategy``."""
    parse_strategy(strategy)
    try:
        sess = Session(presentation, pairs, kind, start, max_nodes=max_nodes, max_steps=max_steps)
    except NodeLimitError:
        g = WordGraph(presentation.alphabet_size)
        return EnumerationResult(Status.NODE_LIMIT, g, None, {}, CongruenceKind(kind), presentation.alphabet_size)
    return sess.run(strategy, order, letter_order)


__all__ = [
    "EnumerationResult",
    "IncompleteResultError",
    "Session",
    "Status",
    "Tc2Outcome",
    "enumerate_congruence",
    "parse_strategy",
]
