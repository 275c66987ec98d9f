"""Acceptance gate: every criterion at its stated bounds, one per test.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS line per
criterion.  All suites are seeded and deterministic.
"""

import random
import time

import pytest

from lrlab import demos
from lrlab.dynamics import (
    Config, FuelExhausted, Value, eval_star, make_allocator, step, Stepped,
    trace,
)
from lrlab.equivalence import (
    ContextTyping, GenerationFailed, distinguish, enumerate_contexts,
    gen_closed_term, gen_well_typed,
)
from lrlab.kernel import (
    IntLit, LEVEL_PRESETS, Loc, TArrow, TBool, TInt, TRef, TVar, TrueLit,
    FalseLit, alpha_eq, alpha_key, level_of, subst_term, term_size,
)
from lrlab.logrel import ValueCorpus, sn_check
from lrlab.relational import (
    EMPTY_RHO, RelCatalog, compositionality_oracle, FiniteRel,
    free_theorem_run, log_equiv_check, related_value_pairs,
)
from lrlab.statics import (
    extend_store_typing, heap_well_typed, typecheck, typecheck_closed,
    TypeCheckError,
)
from lrlab.stepworld import (
    k_equal, IndexedPredicate, sample_future_worlds, v_member_k,
)
from lrlab.surface import parse_term, parse_type
from lrlab.verdict import DISPROVEN, PROVEN, UP_TO_BOUNDS


def T(src):
    return parse_term(src)


def Ty(src):
    return parse_type(src)


def report(n, name):
    print(f"\nACCEPTANCE {n} {name}: PASS")


@pytest.fixture(scope="module")
def corpus():
    return ValueCorpus(depth=3, seed=0)


@pytest.fixture(scope="module")
def catalog(corpus):
    return RelCatalog(corpus, size=16)


def test_criterion_1_golden_typings():
    package_type = Ty("ex a. a * (a -> Bool)")
    assert alpha_eq(typecheck_closed(demos.package_int()), package_type)
    assert alpha_eq(typecheck_closed(demos.package_bool()), package_type)
    assert alpha_eq(typecheck_closed(demos.self_app()),
                    Ty("(mu a. a -> a) -> (mu a. a -> a)"))
    assert alpha_eq(typecheck_closed(demos.knot()), TInt())
    leaking = T(
        "unpack <a, p> = pack <Int, <1, \\x:Int. x = 0>> as ex a. a * (a -> Bool)"
        " in (snd p) 5")
    with pytest.raises(TypeCheckError):
        typecheck_closed(leaking)
    report(1, "golden typings")


def test_criterion_2_golden_dynamics():
    r = eval_star(Config({}, T("(\\x:Int. x = 0) 1")), 100)
    assert isinstance(r, Value) and r.value == FalseLit()
    r = eval_star(Config({}, T("(\\x:Bool. not x) true")), 100)
    assert isinstance(r, Value) and r.value == FalseLit()

    # knot setup in six recorded steps, then a two-cycle
    steps = trace(Config({}, demos.knot()), 8)
    assert [rule for _, rule in steps[:6]] == [
        "alloc", "beta", "assign", "beta", "deref", "beta"]
    from lrlab.dynamics import config_key
    keys = [config_key(c) for c, _ in steps]
    assert keys[5] == keys[3] and keys[6] == keys[4]  # period-two alternation

    r = eval_star(Config({}, demos.knot()), 10_000, detect_cycles=True)
    assert isinstance(r, FuelExhausted) and r.steps_used == 10_000
    assert r.cycle is not None and r.cycle.period == 2
    report(2, "golden dynamics")


def test_criterion_3_existential_equivalence(corpus, catalog):
    rel = FiniteRel(TInt(), TBool(), ((IntLit(1), TrueLit()),))
    start = time.monotonic()
    verdict = log_equiv_check(frozenset(), {}, demos.package_int(),
                              demos.package_bool(), demos.package_type(),
                              catalog.with_extra([rel]), corpus, 10_000)
    elapsed = time.monotonic() - start
    assert verdict.status == PROVEN
    assert elapsed < 10.0, f"equivalence check took {elapsed:.1f}s"

    ct = ContextTyping(hole_type=demos.package_type())
    verdict, found = distinguish(demos.package_int(), demos.package_bool(),
                                 ct, 8, 10_000)
    assert verdict.status == UP_TO_BOUNDS and found is None

    verdict, found = distinguish(demos.package_int(), demos.package_int_variant(),
                                 ct, 8, 10_000)
    assert verdict.status == DISPROVEN and found is not None
    assert found.size <= 8
    assert {alpha_key(found.lhs), alpha_key(found.rhs)} == {
        alpha_key(FalseLit()), alpha_key(TrueLit())}
    report(3, "existential equivalence and refutation")


def test_criterion_4_free_theorems(corpus):
    rng = random.Random(2024)
    type_pool = [TBool(), TInt(), TArrow(TBool(), TBool()),
                 TArrow(TInt(), TInt()), Ty("Bool * Int")]

    def sample(t):
        values = corpus.values(t)
        return values[rng.randrange(len(values))]

    # identity: canonical term plus at least five generated inhabitants
    identity_type = Ty("all a. a -> a")
    inhabitants = {alpha_key(T("/\\a. \\x:a. x")): T("/\\a. \\x:a. x")}
    seed = 0
    while len(inhabitants) < 6 and seed < 200:
        e = gen_well_typed(LEVEL_PRESETS["sysf"], frozenset(), {},
                           identity_type, 10, seed)
        inhabitants.setdefault(alpha_key(e), e)
        seed += 1
    assert len(inhabitants) >= 6  # canonical + five generated
    pairs = []
    for _ in range(100):
        t = type_pool[rng.randrange(len(type_pool))]
        pairs.append((t, sample(t)))
    for e in inhabitants.values():
        for t, v in pairs:
            verdict = free_theorem_run("identity", e, 10_000, tau=t, value=v)
            assert verdict.status == PROVEN

    # constant and cross-type constant over generated e : all a. a -> Bool
    const_type = Ty("all a. a -> Bool")
    consts = {}
    seed = 0
    while len(consts) < 4 and seed < 200:
        e = gen_well_typed(LEVEL_PRESETS["sysf"], frozenset(), {}, const_type,
                           8, seed)
        consts.setdefault(alpha_key(e), e)
        seed += 1
    assert consts
    const_list = list(consts.values())
    for i in range(100):
        e = const_list[i % len(const_list)]
        t1 = type_pool[rng.randrange(len(type_pool))]
        t2 = type_pool[rng.randrange(len(type_pool))]
        v = free_theorem_run("constant", e, 10_000, tau=t1,
                             v1=sample(t1), v2=sample(t1))
        assert v.status == PROVEN
        v = free_theorem_run("constCrossType", e, 10_000, tau1=t1, tau2=t2,
                             v1=sample(t1), v2=sample(t2))
        assert v.status == PROVEN

    # the continuation theorem at base-type answers
    done = 0
    seed = 0
    while done < 25 and seed < 400:
        inner = [TBool(), TInt()][seed % 2]
        cont_type = TArrow(TArrow(inner, TVar("a")), TVar("a"))
        from lrlab.kernel import TForall
        goal = TForall("a", cont_type)
        try:
            e = gen_well_typed(LEVEL_PRESETS["sysf"], frozenset(), {}, goal,
                               10, seed)
        except GenerationFailed:
            seed += 1
            continue
        t_k = [TBool(), TInt()][rng.randrange(2)]
        k = sample(TArrow(inner, t_k))
        verdict = free_theorem_run("continuation", e, 10_000, tau=inner,
                                   tau_k=t_k, k=k, corpus=corpus)
        assert verdict.status == PROVEN
        done += 1
        seed += 1
    assert done == 25
    report(4, "free theorems (identity, constants, continuation)")


def test_criterion_5_strong_normalization(corpus):
    level = LEVEL_PRESETS["stlc"]
    for seed in range(1000):
        term, tau = gen_closed_term(level, 30, seed)
        assert term_size(term) <= 30
        result = eval_star(Config({}, term), 10_000)
        assert isinstance(result, Value), f"seed {seed} failed to normalize"
        assert not sn_check(term, tau, corpus, 10_000).is_disproven, f"seed {seed}"
    report(5, "strong normalization, 1000 terms")


def test_criterion_6_type_safety_fuzzing():
    from lrlab.dynamics import Stuck

    level = LEVEL_PRESETS["full"]
    for seed in range(1000):
        term, tau = gen_closed_term(level, 25, seed)
        for alloc_kind in ("seq", "rand"):
            alloc = make_allocator(alloc_kind, seed)
            config = Config({}, term)
            sigma = {}
            for _ in range(1000):
                outcome = step(config, alloc)
                if not isinstance(outcome, Stepped):
                    assert not isinstance(outcome, Stuck), \
                        f"seed {seed} stuck under {alloc_kind}"
                    break
                config = outcome.config
                # per-step preservation: a store-typing extension exists
                sigma = extend_store_typing(sigma, config.heap)
                assert heap_well_typed(config.heap, sigma)
                got = typecheck(sigma, frozenset(), {}, config.expr)
                assert alpha_eq(got, tau), f"seed {seed} lost its type"
    report(6, "type-safety fuzzing, 1000 terms, both allocators")


def _membership_facts(corpus, count, seed):
    rng = random.Random(seed)
    mb = Ty("mu a. Bool")
    mstream = Ty("mu a. Bool + a")
    w0 = {0: TBool()}
    candidates = [
        (TBool(), {}), (TInt(), {}), (Ty("Bool * Bool"), {}),
        (Ty("Bool + Int"), {}), (mb, {}), (mstream, {}),
        (Ty("Ref Bool"), w0), (Ty("Bool -> Bool"), {}),
        (Ty("Int -> Bool"), w0),
    ]
    facts = []
    while len(facts) < count:
        tau, world = candidates[rng.randrange(len(candidates))]
        k = rng.choice([1, 2, 5, 10, 25])
        if isinstance(tau, TRef):
            values = [Loc(0)]
        else:
            values = corpus.values(tau)
        if not values:
            continue
        v = values[rng.randrange(len(values))]
        facts.append((k, v, tau, world))
    return facts


def test_criterion_7_step_index_laws(corpus):
    rng = random.Random(7)
    # downward closure on 500 facts
    for k, v, tau, world in _membership_facts(corpus, 500, 70):
        base = v_member_k(k, v, tau, world, corpus, 400)
        if base.is_disproven:
            continue
        j = rng.randrange(k + 1)
        lower = v_member_k(j, v, tau, world, corpus, 400)
        assert not lower.is_disproven
        if base.is_proven:
            assert lower.is_proven
    # world monotonicity on 500 facts (heap satisfaction deliberately excluded)
    for k, v, tau, world in _membership_facts(corpus, 500, 71):
        base = v_member_k(k, v, tau, world, corpus, 400)
        if base.is_disproven:
            continue
        for bigger in sample_future_worlds(world, 2)[1:]:
            assert not v_member_k(k, v, tau, bigger, corpus, 400).is_disproven

    # future worlds form a partial order: 200 sampled triples
    pool = [TBool(), TInt(), TArrow(TBool(), TBool())]
    from lrlab.stepworld import future_world
    for i in range(200):
        r = random.Random(i)
        base = {j: pool[r.randrange(3)] for j in range(r.randrange(3))}
        mid = dict(base)
        for j in range(r.randrange(2)):
            mid[5 + j] = pool[r.randrange(3)]
        top = dict(mid)
        if r.random() < 0.7:
            top[9] = pool[r.randrange(3)]
        assert future_world(base, base)
        assert future_world(mid, base) and future_world(top, mid)
        assert future_world(top, base)
        if future_world(base, mid):
            assert set(base) == set(mid)

    # k-equality laws on 200 sampled predicates
    values = [TrueLit(), FalseLit(), IntLit(0), IntLit(1)]
    for i in range(200):
        r = random.Random(1000 + i)
        p = IndexedPredicate.close([(r.randrange(5), values[r.randrange(4)])
                                    for _ in range(r.randrange(5))])
        q = IndexedPredicate.close([(r.randrange(5), values[r.randrange(4)])
                                    for _ in range(r.randrange(5))])
        assert k_equal(0, p, q)
        for k in range(4):
            if k_equal(k + 1, p, q):
                assert k_equal(k, p, q)
    report(7, "step-index laws (closure, monotonicity, order, k-equality)")


def test_criterion_8_oracle_equivalences(corpus, catalog):
    # compositionality oracle on 200 sampled instances
    shapes = [("a", "Bool"), ("a", "Int"), ("a -> a", "Bool"),
              ("a * Bool", "Int"), ("Bool + a", "Bool"),
              ("all b. b -> a", "Int"), ("a -> Bool", "Bool -> Bool")]
    from lrlab.kernel import subst_type_in_type
    rng = random.Random(8)
    instances = 0
    while instances < 200:
        tau_src, tp_src = shapes[rng.randrange(len(shapes))]
        tau, tau_prime = Ty(tau_src), Ty(tp_src)
        target = subst_type_in_type(tau, tau_prime, "a")
        pairs, _ = related_value_pairs(target, EMPTY_RHO, catalog, corpus, 2000)
        if not pairs:
            continue
        sample_pairs = [pairs[rng.randrange(len(pairs))]]
        if isinstance(target, TBool) and rng.random() < 0.5:
            sample_pairs.append((TrueLit(), FalseLit()))
        verdict = compositionality_oracle(tau, tau_prime, "a", EMPTY_RHO,
                                          sample_pairs, catalog, corpus, 2000)
        assert verdict.status == PROVEN
        instances += len(sample_pairs)

    # the context enumerator equals brute-force unrolling at sizes <= 4
    from test_equivalence import brute_force_contexts
    for ct, level in [
        (ContextTyping(hole_type=TBool()), level_of()),
        (ContextTyping(hole_type=demos.package_type()),
         level_of("pairs", "int", "existential")),
    ]:
        enumerated = {alpha_key(c) for c in enumerate_contexts(ct, 4, level)}
        brute = {alpha_key(c) for c in brute_force_contexts(ct, 4, level)}
        assert enumerated == brute

    # sequential substitution equals the simultaneous oracle on 200 triples
    from test_kernel import _simultaneous_subst
    done = 0
    seed = 0
    while done < 200:
        tau = [Ty("Bool"), Ty("Int"), Ty("Bool -> Bool")][seed % 3]
        e = gen_well_typed(LEVEL_PRESETS["stlc"], frozenset(),
                           {"x": TBool(), "y": tau}, TBool(), 14, seed)
        v = corpus.values(TBool())[seed % 2]
        v2 = corpus.values(tau)[seed % len(corpus.values(tau))]
        oracle = _simultaneous_subst(e, {"x": v, "y": v2})
        assert alpha_eq(subst_term(subst_term(e, v, "x"), v2, "y"), oracle)
        assert alpha_eq(subst_term(subst_term(e, v2, "y"), v, "x"), oracle)
        done += 1
        seed += 1
    report(8, "oracle equivalences (compositionality, contexts, substitution)")


def test_criterion_9_allocator_independence():
    level = LEVEL_PRESETS["ref"]
    done = 0
    seed = 0
    while done < 200:
        tau = TBool() if seed % 2 else TInt()
        try:
            term = gen_well_typed(level, frozenset(), {}, tau, 25, seed)
        except GenerationFailed:
            seed += 1
            continue
        r_seq = eval_star(Config({}, term), 10_000, make_allocator("seq"))
        r_rand = eval_star(Config({}, term), 10_000, make_allocator("rand", seed + 99))
        assert isinstance(r_seq, Value) and isinstance(r_rand, Value), f"seed {seed}"
        assert alpha_eq(r_seq.value, r_rand.value), f"seed {seed}"
        done += 1
        seed += 1
    report(9, "allocator independence, 200 programs")
