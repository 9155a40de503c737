"""Monoid-with-zero enumeration, Rees congruences and Stephen's procedure.

A presentation with a ``zero`` letter is enumerated by the ordinary
session: the session reserves node 1 as the zero node, gives it a loop for
every letter, and every node defined later gets its zero edge into it. The
absorbing relations never appear in the relation list.
"""

from __future__ import annotations

import enum
from typing import Sequence

from . import _kernels as kern
from .enumerator import EnumerationResult, Session, enumerate_congruence
from .word_graph import DEFAULT_MAX_NODES, WordGraph
from .words import (
    CongruenceKind,
    Presentation,
    PresentationError,
    Relation,
    check_word,
    default_letters,
)


def expand_zero(p: Presentation) -> Presentation:
    """The same monoid with the zero as a plain letter: ``x0 = 0x = 0`` for
    every other letter ``x`` and ``00 = 0`` become explicit relations."""
    if p.zero is None:
        return p
    z = p.zero
    extra = []
    for a in range(p.alphabet_size):
        if a != z:
            extra.append(Relation((a, z), (z,)))
            extra.append(Relation((z, a), (z,)))
    extra.append(Relation((z, z), (z,)))
    return Presentation(p.alphabet_size, p.relations + tuple(extra), None, p.letters)


def run_with_zero(
    p: Presentation,
    pairs: Sequence = (),
    strategy: str = "hlt",
    kind=CongruenceKind.RIGHT,
    **limits,
) -> EnumerationResult:
    """Enumerate with the zero handled structurally; ``zero_class`` of the
    result is the class of the zero."""
    if p.zero is None:
        raise PresentationError("presentation has no zero letter")
    return enumerate_congruence(p, pairs, kind, strategy, **limits)


def with_zero_letter(p: Presentation) -> Presentation:
    """``p`` with a fresh zero letter appended, or ``p`` itself if it has one."""
    if p.zero is not None:
        return p
    k = p.alphabet_size
    names = p.letter_names()
    spare = [c for c in default_letters(k + 20) if c not in names]
    if "0" not in names:
        spare.insert(0, "0")
    return Presentation(k + 1, p.relations, k, names + spare[0])


def run_rees(
    p: Presentation,
    ideal_words: Sequence,
    strategy: str = "hlt",
    kind=CongruenceKind.RIGHT,
    **limits,
) -> EnumerationResult:
    """Collapse the (right, by default) ideal generated by ``ideal_words`` to
    the zero. A zero letter is added when ``p`` has none, so without ideal
    words the result is the monoid with a zero adjoined."""
    q = with_zero_letter(p)
    z = (q.zero,)
    pairs = []
    for w in ideal_words:
        w = tuple(w)
        check_word(w, p.alphabet_size if p.zero is None else q.alphabet_size)
        pairs.append(Relation(w, z))
    return enumerate_congruence(q, pairs, kind, strategy, **limits)


# -- Stephen's procedure ---------------------------------------------------------


class StephenStatus(str, enum.Enum):
    CLOSED = "closed"
    NODE_LIMIT = "node_limit"
    STEP_LIMIT = "step_limit"


class NotClosedError(RuntimeError):
    """Membership asked of a Stephen graph that has not reached its fixed point."""


class StephenGraph:
    """The word graph of Stephen's procedure for a fixed word ``w``.

    Starts as the linear graph of ``w`` with accept node ``|w|``. Elementary
    expansions and determinations only ever identify nodes or add new ones,
    so the accept node is tracked through the partition.
    """

    def __init__(self, p: Presentation, w: Sequence[int], *, max_nodes: int = DEFAULT_MAX_NODES,
                 max_steps: int | None = None):
        w = tuple(w)
        check_word(w, p.alphabet_size)
        self.presentation = p
        self.word = w
        # the zero only needs its relations here, not its node
        self._sess = sess = Session(expand_zero(p), (), max_nodes=max_nodes, max_steps=max_steps)
        self._accept = sess._trace_define(0, w)
        sess._start_flags(by_node=True)
        self.status: StephenStatus | None = None

    @property
    def graph(self) -> WordGraph:
        return self._sess.graph

    @property
    def accept(self) -> int:
        return self._sess.find(self._accept)

    @property
    def closed(self) -> bool:
        return self.status is StephenStatus.CLOSED

    @property
    def stats(self) -> dict:
        return self._sess.stats

    def step(self, budget: int = -1) -> bool:
        """Expand up to ``budget`` flagged (node, relation) pairs (all of
        them if negative); returns whether flagged pairs remain. Reaching
        the fixed point or a limit sets ``status``."""
        if self.status is not None:
            return False
        sess = self._sess
        if not sess.relations:
            self.status = StephenStatus.CLOSED
            return False
        headroom = sess._stephen_headroom
        while True:
            sess._reserve(sess.graph.next_id + headroom)
            code = kern.stephen_run(*sess._g(), sess._coinc, sess._ded, sess._letters, sess._ridx,
                                    *sess._tree_args(), sess._dirty, sess._heap, sess._later, sess._qsz,
                                    headroom, budget)
            grew = sess._check_work()
            if code != kern.GROW:
                break
            if not grew:
                sess._reserve(2 * sess.graph.capacity)
        if code == kern.PAUSED:
            return True
        self.status = {
            kern.DONE: StephenStatus.CLOSED,
            kern.NODE_LIMIT: StephenStatus.NODE_LIMIT,
            kern.STEP_LIMIT: StephenStatus.STEP_LIMIT,
        }[code]
        return False

    def run(self) -> StephenStatus:
        self.step()
        return self.status

    def accepts(self, u: Sequence[int], *, check: bool = True) -> bool:
        """Whether ``u`` labels a path from 0 to the accept node. With
        ``check`` (the default) this is only answered once closed, where it
        decides equality with ``w``."""
        if check and not self.closed:
            raise NotClosedError("Stephen graph is not closed; run it first")
        u = tuple(u)
        check_word(u, self.presentation.alphabet_size)
        return self.graph.path_target(0, u) == self.accept


def stephen_build(p: Presentation, w: Sequence[int], **limits) -> StephenGraph:
    return StephenGraph(p, w, **limits)


def stephen_run(g: StephenGraph) -> StephenStatus:
    return g.run()


def stephen_accepts(g: StephenGraph, u: Sequence[int]) -> bool:
    return g.accepts(u)


__all__ = [
    "NotClosedError",
    "StephenGraph",
    "StephenStatus",
    "expand_zero",
    "run_rees",
    "run_with_zero",
    "stephen_accepts",
    "stephen_build",
    "stephen_run",
    "with_zero_letter",
]
