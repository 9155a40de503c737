import random

from tcmonoid import Presentation
from tcmonoid.felsch_tree import FelschTree, build

A, B = 0, 1
R = [((A,) * 4, (A,)), ((B,) * 3, (B,)), ((A, B, A, B), (A, A))]


def w(text):
    return tuple("ab".index(c) for c in text)


def test_node_set():
    t = build(Presentation(2, R))
    expected = {w(s) for s in ["", "a", "b", "aa", "ab", "ba", "bb", "aaa", "aba", "bab", "bbb", "aaaa", "abab"]}
    assert len(t) == 13
    assert set(t.words) == expected


def test_iota_table():
    t = build(Presentation(2, R))
    table = {
        "": {0, 1, 2},
        "a": {0, 2},
        "aa": {0, 2},
        "aaa": {0},
        "aaaa": {0},
        "ab": {2},
        "aba": {2},
        "abab": {2},
        "b": {1},
        "bb": {1},
        "bbb": {1},
        "ba": set(),
        "bab": set(),
    }
    for s, rels in table.items():
        assert t.iota_of(w(s)) == rels, s
    assert t.iota_of(w("bba")) == frozenset()


def test_extensions():
    t = build(Presentation(2, R))
    assert t.extension(w("ab"), B) == w("bab")
    assert t.extension(w("ba"), B) is None
    assert t.extension(w("ba"), A) == w("aba")
    assert t.extension((), A) == (A,)
    assert t.extension(w("bba"), A) is None


def test_empty_relations():
    t = FelschTree(2, [])
    assert len(t) == 0
    assert t.root_child(0) == -1
    iota_ptr, *_ = t.arrays()
    assert iota_ptr.shape == (1,)


def test_csr_arrays_match_tree():
    t = build(Presentation(2, R))
    iota_ptr, iota_data, ch_ptr, ch_letter, ch_node, root = t.arrays()
    for node in range(len(t)):
        assert set(iota_data[iota_ptr[node]:iota_ptr[node + 1]].tolist()) == set(t.iota[node])
        kids = list(zip(ch_letter[ch_ptr[node]:ch_ptr[node + 1]].tolist(), ch_node[ch_ptr[node]:ch_ptr[node + 1]].tolist()))
        assert kids == t.children[node]
    assert root.tolist() == [t.node((A,)), t.node((B,))]


def test_against_brute_force():
    rng = random.Random(7)
    for _ in range(150):
        k = rng.randint(1, 3)
        rels = [
            (tuple(rng.randrange(k) for _ in range(rng.randint(0, 5))),
             tuple(rng.randrange(k) for _ in range(rng.randint(0, 5))))
            for _ in range(rng.randint(1, 4))
        ]
        t = FelschTree(k, rels)
        subs = set()
        for u, v in rels:
            for side in (u, v):
                for i in range(len(side) + 1):
                    for j in range(i, len(side) + 1):
                        subs.add(side[i:j])
        assert set(t.words) == subs
        for s in subs:
            brute = {r for r, (u, v) in enumerate(rels) if u[: len(s)] == s or v[: len(s)] == s}
            assert t.iota_of(s) == brute
            for a in range(k):
                ext = t.extension(s, a)
                if (a,) + s in subs:
                    assert ext == (a,) + s
                    assert len(ext) == len(s) + 1 and ext[1:] == s
                else:
                    assert ext is None
