import itertools

import pytest

from conftest import load, words
from tcmonoid import Presentation, PresentationError, Relation, isomorphic, run_rees, run_with_zero
from tcmonoid.enumerator import enumerate_congruence
from tcmonoid.variants import (
    NotClosedError,
    StephenStatus,
    expand_zero,
    stephen_accepts,
    stephen_build,
    stephen_run,
    with_zero_letter,
)

A, B, C = 0, 1, 2


def all_words(k, n):
    for m in range(n + 1):
        yield from itertools.product(range(k), repeat=m)


# -- monoids with zero ----------------------------------------------------------------


def test_zero_presentation_count_and_absorption():
    p, pairs, kind = load("zero")
    r = run_with_zero(p, pairs)
    assert r.num_classes == 13
    z = p.zero
    assert r.zero_class == r.class_of((z,))
    for w in all_words(3, 3):
        assert r.class_of(w + (z,)) == r.zero_class
        assert r.class_of((z,) + w) == r.zero_class
    assert r.class_of((A, B)) == r.zero_class
    assert r.class_of((A,)) != r.zero_class


@pytest.mark.parametrize("strategy", ["hlt", "felsch", "felsch-mod", "alt:2,1"])
def test_structural_zero_matches_explicit_relations(strategy):
    p, pairs, kind = load("zero")
    structural = run_with_zero(p, pairs, strategy)
    explicit = enumerate_congruence(expand_zero(p), pairs, kind, strategy)
    assert explicit.zero_class is None
    assert structural.num_classes == explicit.num_classes
    assert isomorphic(structural.graph, explicit.graph)
    for w in all_words(3, 4):
        for v in all_words(3, 2):
            assert (structural.class_of(w) == structural.class_of(v)) == (explicit.class_of(w) == explicit.class_of(v))


def test_run_with_zero_needs_zero(boolean_pair):
    p, pairs, _ = boolean_pair
    with pytest.raises(PresentationError):
        run_with_zero(p, pairs)


def test_zero_twosided_and_left():
    p, pairs, _ = load("zero")
    for kind in ("left", "twosided"):
        structural = run_with_zero(p, pairs, kind=kind)
        explicit = enumerate_congruence(expand_zero(p), pairs, kind)
        assert structural.num_classes == explicit.num_classes == 13


def test_expand_zero_relations():
    p = Presentation(2, [((A,), (A, A))], zero=1)
    q = expand_zero(p)
    assert q.zero is None
    assert set(q.relations[1:]) == {Relation((A, B), (B,)), Relation((B, A), (B,)), Relation((B, B), (B,))}
    assert expand_zero(Presentation(1)) == Presentation(1)


# -- Rees congruences -------------------------------------------------------------


def rees_oracle(c, ideal_words):
    """Node classes of the Rees right congruence on a Cayley graph."""
    ideal = set()
    todo = []
    for w in ideal_words:
        x = c.graph.path_target(0, w)
        todo.append(x)
    while todo:
        x = todo.pop()
        if x in ideal:
            continue
        ideal.add(x)
        todo.extend(c.graph.target(x, a) for a in range(len(c.generators)))
    return ideal


def test_rees_without_ideal_adjoins_isolated_zero(boolean_pair):
    p, _, _ = boolean_pair
    r = run_rees(p, [])
    assert r.num_classes == 10
    z = with_zero_letter(p).zero
    assert z == 3
    assert r.zero_class == r.class_of((z,))
    for w in all_words(3, 3):
        if w:
            assert r.class_of(w) != r.zero_class


@pytest.mark.parametrize("ideal", [["aa"], ["c"], ["ab"], ["b", "c"], ["1"]])
def test_rees_against_oracle(boolean_pair, bool_monoid, ideal):
    p, _, _ = boolean_pair
    ideal_words = words(p, *ideal)
    r = run_rees(p, ideal_words)
    collapsed = rees_oracle(bool_monoid, ideal_words)
    assert r.num_classes == 9 - len(collapsed) + 1
    for x, rep in enumerate(bool_monoid.reps):
        assert (r.class_of(rep) == r.zero_class) == (x in collapsed)


def test_rees_example_count(boolean_pair):
    p, _, _ = boolean_pair
    assert run_rees(p, words(p, "aa")).num_classes == 9


def test_rees_on_presentation_with_zero():
    p, _, _ = load("zero")
    r = run_rees(p, [(A,)])
    base = run_with_zero(p)
    assert r.zero_class == r.class_of((p.zero,)) == r.class_of((A, A))
    assert r.num_classes < base.num_classes
    with pytest.raises(ValueError):
        run_rees(p, [(7,)])


# -- Stephen's procedure ---------------------------------------------------------------


def test_stephen_without_relations_is_linear():
    p = Presentation(2)
    g = stephen_build(p, (A, B, B))
    assert stephen_run(g) is StephenStatus.CLOSED
    assert g.graph.num_nodes == 4
    assert g.accept == 3
    assert stephen_accepts(g, (A, B, B))
    assert not stephen_accepts(g, (A, B))


def test_stephen_commutative_example():
    p = Presentation(2, [((A, B), (B, A))])
    g = stephen_build(p, (A, B))
    assert g.graph.num_nodes == 3
    assert g.run() is StephenStatus.CLOSED
    accepted = {w for w in all_words(2, 3) if g.accepts(w)}
    assert accepted == {(A, B), (B, A)}


def test_stephen_pair_monoid_examples(boolean_pair):
    p, _, _ = boolean_pair
    g = stephen_build(p, (B,))
    g.run()
    assert g.accepts((B,)) and g.accepts((B, B))
    assert not g.accepts((A,))
    h = stephen_build(p, (A, A))
    h.run()
    assert h.accepts((A, C)) and h.accepts((A, B, A)) and h.accepts((C, C, C))
    assert not h.accepts((C,)) and not h.accepts((B, A, B))


def test_stephen_agrees_with_enumeration(boolean_pair):
    p, _, _ = boolean_pair
    monoid = enumerate_congruence(p, (), "twosided")
    for w in all_words(3, 2):
        g = stephen_build(p, w)
        assert g.run() is StephenStatus.CLOSED
        for u in all_words(3, 3):
            assert g.accepts(u) == (monoid.class_of(u) == monoid.class_of(w)), (w, u)


def test_stephen_on_zero_presentation():
    p, _, _ = load("zero")
    monoid = enumerate_congruence(expand_zero(p), (), "twosided")
    for w in [(A, B), (A,), (B, B, B)]:
        g = stephen_build(p, w)
        assert g.run() is StephenStatus.CLOSED
        for u in all_words(3, 3):
            assert g.accepts(u) == (monoid.class_of(u) == monoid.class_of(w))


def test_not_closed_error_and_unchecked_query(boolean_pair):
    p, _, _ = boolean_pair
    g = stephen_build(p, (A, A))
    with pytest.raises(NotClosedError):
        g.accepts((A, C))
    assert g.accepts((A, A), check=False)
    with pytest.raises(ValueError):
        stephen_build(p, (9,))


def test_stephen_step_is_monotone():
    p, _, _ = load("felsch_tree")
    g = stephen_build(p, (A, B, A))
    final = stephen_build(p, (A, B, A))
    final.run()
    seen = []
    while g.step(3):
        # accepted words only grow as the graph is expanded and folded
        now = {u for u in all_words(2, 5) if g.accepts(u, check=False)}
        assert all(prev <= now for prev in seen)
        seen.append(now)
    assert g.closed
    assert not g.step()
    expected = {u for u in all_words(2, 5) if final.accepts(u)}
    assert {u for u in all_words(2, 5) if g.accepts(u)} == expected
    assert all(s <= expected for s in seen)


def test_stephen_limits():
    p, _, _ = load("walker3")
    g = stephen_build(p, (A, B) * 3, max_nodes=50)
    assert g.run() is StephenStatus.NODE_LIMIT
    h = stephen_build(p, (A, B) * 3, max_steps=10)
    assert h.run() is StephenStatus.STEP_LIMIT
    with pytest.raises(NotClosedError):
        h.accepts(())
