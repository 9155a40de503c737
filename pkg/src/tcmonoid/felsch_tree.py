"""Subword tree of the relation words, used to target deduction processing.

Nodes are the distinct contiguous subwords of relation words (including
the empty word). There is an edge ``u --a--> au`` whenever both are
subwords, so every non-empty node has exactly one parent (itself minus its
first letter) and the structure is a tree rooted at the empty word.
Each node also records which relations have it as a prefix of either side.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .words import Presentation


class FelschTree:
    def __init__(self, alphabet_size: int, relations: Sequence):
        self.alphabet_size = alphabet_size
        self.relations = tuple(relations)
        self.index: dict = {}
        self.words: list = []
        # children[node] is a list of (letter, child) for letter-prepend edges
        self.children: list = []
        self.iota: list = []
        self._child_of: list = []

        if not self.relations:
            return

        subwords = set()
        for rel in self.relations:
            for side in rel:
                side = tuple(side)
                n = len(side)
                for i in range(n + 1):
                    for j in range(i, n + 1):
                        subwords.add(side[i:j])
        for w in sorted(subwords, key=lambda w: (len(w), w)):
            self.index[w] = len(self.words)
            self.words.append(w)
        n = len(self.words)
        self.children = [[] for _ in range(n)]
        self._child_of = [[-1] * alphabet_size for _ in range(n)]
        iota = [[] for _ in range(n)]
        for node, w in enumerate(self.words):
            if w:
                parent = self.index[w[1:]]
                self.children[parent].append((w[0], node))
                self._child_of[parent][w[0]] = node
        for parent in range(n):
            self.children[parent].sort()
        for r, rel in enumerate(self.relations):
            prefixes = set()
            for side in rel:
                side = tuple(side)
                for k in range(len(side) + 1):
                    prefixes.add(side[:k])
            for w in prefixes:
                iota[self.index[w]].append(r)
        self.iota = [tuple(sorted(x)) for x in iota]

    def __len__(self):
        return len(self.words)

    def __contains__(self, w):
        return tuple(w) in self.index

    def node(self, w) -> int | None:
        return self.index.get(tuple(w))

    def iota_of(self, w) -> frozenset:
        """Indices of relations having ``w`` as a prefix of either side."""
        node = self.index.get(tuple(w))
        if node is None:
            return frozenset()
        return frozenset(self.iota[node])

    def extension(self, w, letter: int):
        """The subword ``letter + w`` if it is a node, else ``None``."""
        node = self.index.get(tuple(w))
        if node is None:
            return None
        child = self._child_of[node][letter]
        return None if child < 0 else self.words[child]

    def root_child(self, letter: int) -> int:
        """Node id of the one-letter subword, or -1."""
        if not self.words:
            return -1
        return self._child_of[0][letter]


    def arrays(self):
        """CSR form for the compiled search: ``(iota_ptr, iota_data, child_ptr,
        child_letter, child_node, root)`` where ``root[a]`` is the node of the
        one-letter word ``a`` or -1."""
        n = len(self.words)
        iota_ptr = np.zeros(n + 1, np.int64)
        child_ptr = np.zeros(n + 1, np.int64)
        for t in range(n):
            iota_ptr[t + 1] = iota_ptr[t] + len(self.iota[t])
            child_ptr[t + 1] = child_ptr[t] + len(self.children[t])
        iota_data = np.array([r for t in range(n) for r in self.iota[t]], np.int64)
        child_letter = np.array([a for t in range(n) for a, _ in self.children[t]], np.int64)
        child_node = np.array([c for t in range(n) for _, c in self.children[t]], np.int64)
        root = np.full(self.alphabet_size, -1, np.int64)
        if n:
            root[:] = self._child_of[0]
        return iota_ptr, iota_data, child_ptr, child_letter, child_node, root


def build(p: Presentation, relations: Sequence | None = None) -> FelschTree:
    return FelschTree(p.alphabet_size, p.relations if relations is None else relations)
