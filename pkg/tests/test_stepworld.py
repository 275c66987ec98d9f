"""Step-indexed interpretations: membership goldens, index/world laws,
finite-predicate machinery."""

import random

import pytest

from lrlab import demos
from lrlab.kernel import (
    Alloc, Deref, Fold, IntLit, Loc, TArrow, TBool, TInt, TRef, TrueLit,
    FalseLit, alpha_eq,
)
from lrlab.stepworld import (
    IndexedPredicate, e_member_k, future_world, heap_for_world, heap_sat,
    k_cut, k_equal, sample_future_worlds, sem_safe_k, v_member_k,
)
from lrlab.surface import parse_term, parse_type
from lrlab.verdict import DISPROVEN, PROVEN, UP_TO_BOUNDS


def T(src):
    return parse_term(src)


def Ty(src):
    return parse_type(src)


FUEL = 500
MU_ID = Ty("mu a. a -> a")


def test_fold_at_index_zero_vacuous(corpus):
    v = T("fold (\\x: mu a. a -> a. x) as mu a. a -> a")
    assert v_member_k(0, v, MU_ID, {}, corpus, FUEL).status == PROVEN


def test_location_membership(corpus):
    for k in (0, 1, 5, 25):
        assert v_member_k(k, Loc(0), Ty("Ref Bool"), {0: TBool()},
                          corpus, FUEL).status == PROVEN
    assert v_member_k(5, Loc(0), Ty("Ref Bool"), {0: TInt()},
                      corpus, FUEL).status == DISPROVEN
    assert v_member_k(5, Loc(1), Ty("Ref Bool"), {0: TBool()},
                      corpus, FUEL).status == DISPROVEN


def test_fold_payload_checked_one_level_down(corpus):
    mb = Ty("mu a. Bool")
    assert v_member_k(5, Fold(TrueLit(), mb), mb, {}, corpus, FUEL).status == PROVEN
    assert v_member_k(5, Fold(IntLit(3), mb), mb, {}, corpus, FUEL).status == DISPROVEN


def test_nested_mu_spends_indices(corpus):
    from lrlab.kernel import Pair
    stream = Ty("mu a. Bool * a")
    # eight folds deep, with a wrong-typed core: only a large enough index
    # looks far enough in to notice
    deep = Fold(Pair(TrueLit(), IntLit(0)), stream)
    for _ in range(7):
        deep = Fold(Pair(TrueLit(), deep), stream)
    assert v_member_k(3, deep, stream, {}, corpus, FUEL).status == PROVEN
    assert v_member_k(20, deep, stream, {}, corpus, FUEL).status == DISPROVEN


def test_e_member_deref(corpus):
    v = e_member_k(10, Deref(Loc(0)), TBool(), {0: TBool()}, {0: TrueLit()},
                   corpus, FUEL)
    assert v.status == PROVEN


def test_e_member_alloc_extends_world(corpus):
    v = e_member_k(10, Alloc(TrueLit()), Ty("Ref Bool"), {}, {}, corpus, FUEL)
    assert v.status == PROVEN


def test_e_member_divergence_is_vacuous(corpus):
    v = e_member_k(3, demos.self_app_diverging(), MU_ID, {}, {}, corpus, FUEL)
    assert v.status == PROVEN


def test_e_member_index_zero(corpus):
    assert e_member_k(0, T("true"), TBool(), {}, {}, corpus, FUEL).status == PROVEN


def test_e_member_fuel_below_index(corpus):
    v = e_member_k(10, demos.self_app_diverging(), MU_ID, {}, {}, corpus, 3)
    assert v.status == UP_TO_BOUNDS


def test_e_member_stuck_disproven(corpus):
    v = e_member_k(5, Deref(Loc(0)), TBool(), {}, {}, corpus, FUEL)
    assert v.status == DISPROVEN


def test_heap_sat_goldens(corpus):
    assert heap_sat(7, {}, {}, corpus, FUEL).status == PROVEN
    assert heap_sat(5, {0: TrueLit()}, {0: TBool()}, corpus, FUEL).status == PROVEN
    assert heap_sat(5, {0: TrueLit()}, {0: TInt()}, corpus, FUEL).status == DISPROVEN
    assert heap_sat(5, {0: TrueLit()}, {}, corpus, FUEL).status == DISPROVEN


def test_heap_for_world_handles_reference_cells(corpus):
    world = {0: TBool(), 1: TRef(TBool())}
    heap = heap_for_world(world, corpus)
    assert heap[1] == Loc(0)
    assert heap_sat(4, heap, world, corpus, FUEL).status == PROVEN


def test_future_world():
    w = {0: TBool()}
    assert future_world(w, w)
    assert future_world({0: TBool(), 1: TInt()}, w)
    assert not future_world({0: TInt()}, w)
    assert not future_world({}, w)


def test_future_world_partial_order():
    rng = random.Random(3)
    pool = [TBool(), TInt(), TArrow(TBool(), TBool())]
    for _ in range(60):
        base = {i: rng.choice(pool) for i in range(rng.randrange(3))}
        mid = dict(base)
        for i in range(rng.randrange(2)):
            mid[10 + i] = rng.choice(pool)
        top = dict(mid)
        top[20] = rng.choice(pool)
        assert future_world(base, base)  # reflexive
        assert future_world(mid, base) and future_world(top, mid)
        assert future_world(top, base)  # transitive
        if future_world(base, mid) and future_world(mid, base):  # antisymmetric
            assert set(base) == set(mid) and all(
                alpha_eq(base[l], mid[l]) for l in base)


def test_sem_safe_goldens(corpus):
    assert sem_safe_k({}, T("true"), TBool(), 9, {}, corpus, FUEL).status == PROVEN
    v = sem_safe_k({"x": TBool()}, T("x"), TBool(), 9, {}, corpus, FUEL)
    assert v.status == PROVEN
    v = sem_safe_k({}, T("!(ref false)"), TBool(), 10, {}, corpus, FUEL)
    assert v.status == PROVEN


@pytest.mark.parametrize("seed", range(20))
def test_sem_safe_never_disproven_on_generated(seed, corpus):
    # the fundamental-property harness: sampled worlds and allocators
    from lrlab.dynamics import make_allocator
    from lrlab.equivalence import gen_closed_term
    from lrlab.kernel import LEVEL_PRESETS
    level = LEVEL_PRESETS["mu"] if seed % 2 else LEVEL_PRESETS["ref"]
    term, tau = gen_closed_term(level, 15, seed)
    worlds = [{}, {0: TBool()}, {0: TInt(), 1: TArrow(TBool(), TBool())}]
    world = worlds[seed % len(worlds)]
    alloc = make_allocator("rand", seed) if seed % 3 == 0 else make_allocator("seq")
    for k in (1, 5, 25):
        assert not sem_safe_k({}, term, tau, k, world, corpus, 300,
                              alloc=alloc).is_disproven


@pytest.mark.parametrize("seed", range(12))
def test_adequacy_sem_safe_implies_safe(seed, corpus):
    # index-family membership is adequate for the plain safety walk
    from lrlab.equivalence import gen_closed_term
    from lrlab.kernel import LEVEL_PRESETS
    from lrlab.logrel import safe_check
    term, tau = gen_closed_term(LEVEL_PRESETS["ref"], 15, seed)
    verdicts = [sem_safe_k({}, term, tau, k, {}, corpus, 300) for k in (1, 5, 25)]
    if all(not v.is_disproven for v in verdicts):
        assert not safe_check(term, 1000).is_disproven


# -- downward closure and world monotonicity ---------------------------------


def _fact_samples(corpus):
    mb = Ty("mu a. Bool")
    w = {0: TBool()}
    return [
        (8, T("true"), TBool(), {}),
        (6, T("<true, 2>"), Ty("Bool * Int"), {}),
        (9, Fold(TrueLit(), mb), mb, {}),
        (7, Loc(0), Ty("Ref Bool"), w),
        (5, T("\\x:Bool. not x"), Ty("Bool -> Bool"), w),
        (4, T("inl true as Bool + Int"), Ty("Bool + Int"), {}),
    ]


def test_downward_closure_on_samples(corpus):
    for k, v, tau, w in _fact_samples(corpus):
        base = v_member_k(k, v, tau, w, corpus, FUEL)
        if base.is_disproven:
            continue
        for j in (0, 1, k // 2, k):
            sub = v_member_k(j, v, tau, w, corpus, FUEL)
            assert not sub.is_disproven
            if base.is_proven:
                assert sub.is_proven


def test_world_monotonicity_on_samples(corpus):
    for k, v, tau, w in _fact_samples(corpus):
        base = v_member_k(k, v, tau, w, corpus, FUEL)
        if base.is_disproven:
            continue
        for w2 in sample_future_worlds(w, 3):
            assert not v_member_k(k, v, tau, w2, corpus, FUEL).is_disproven


def test_heap_sat_downward_closed(corpus):
    heap, world = {0: TrueLit()}, {0: TBool()}
    assert heap_sat(9, heap, world, corpus, FUEL).is_proven
    for j in (0, 3, 9):
        assert heap_sat(j, heap, world, corpus, FUEL).is_proven


# -- finite predicate machinery ----------------------------------------------


def test_indexed_predicate_requires_downward_closure():
    with pytest.raises(ValueError):
        IndexedPredicate(((2, TrueLit()),))
    pred = IndexedPredicate.close([(2, TrueLit())])
    assert pred.key_set() == IndexedPredicate(
        ((0, TrueLit()), (1, TrueLit()), (2, TrueLit()))).key_set()


def test_k_cut():
    pred = IndexedPredicate.close([(2, TrueLit())])
    cut = k_cut(2, pred)
    assert cut == IndexedPredicate.close([(1, TrueLit())])


def test_k_equal_zero_is_total():
    rng = random.Random(0)
    values = [TrueLit(), FalseLit(), IntLit(0), IntLit(1)]
    for _ in range(50):
        p = IndexedPredicate.close([(rng.randrange(4), rng.choice(values))
                                    for _ in range(rng.randrange(4))])
        q = IndexedPredicate.close([(rng.randrange(4), rng.choice(values))
                                    for _ in range(rng.randrange(4))])
        assert k_equal(0, p, q)
        for k in range(4):
            if k_equal(k + 1, p, q):
                assert k_equal(k, p, q)


def test_non_expansive_transformers():
    rng = random.Random(1)
    values = [TrueLit(), FalseLit(), IntLit(0)]
    fixed = IndexedPredicate.close([(3, IntLit(0)), (1, TrueLit())])
    transformers = [
        lambda p: p.union(fixed),
        lambda p: p.intersection(fixed),
        lambda p: k_cut(2, p.union(fixed)),
    ]
    for _ in range(40):
        p = IndexedPredicate.close([(rng.randrange(5), rng.choice(values))
                                    for _ in range(rng.randrange(5))])
        q = IndexedPredicate.close([(rng.randrange(5), rng.choice(values))
                                    for _ in range(rng.randrange(5))])
        for k in range(5):
            if k_equal(k, p, q):
                for f in transformers:
                    assert k_equal(k, f(p), f(q))
