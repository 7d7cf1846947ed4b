import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultloc.division import (
    DivisionPlan,
    TokenBudget,
    available_counters,
    count_tokens,
    divide,
    ideal_group_count,
    register_counter,
    single_group,
)
from faultloc.errors import EntryExceedsBudget, UnknownCounter
from faultloc.spectra import MethodId, ochiai, parse_spectra, rank_by


def entries(sizes, chars_per_token=4):
    """Method entries whose chars4 token count equals the given sizes."""
    return [(MethodId.parse(f"p$C#m{i}()"), "x" * (n * chars_per_token)) for i, n in enumerate(sizes)]


def test_counter_values():
    assert count_tokens("") == 0
    assert count_tokens("abcd efgh") == 3  # 9 chars -> ceil(9/4)
    assert count_tokens("abcd efgh", "whitespace") == 2
    with pytest.raises(UnknownCounter):
        count_tokens("x", "bpe-nonexistent")


@given(st.text(), st.text())
def test_counter_superadditive(a, b):
    for c in ("chars4", "whitespace"):
        assert count_tokens(a + b, c) >= max(count_tokens(a, c), count_tokens(b, c))


def test_register_counter():
    register_counter("chars1", len)
    assert "chars1" in available_counters()
    assert count_tokens("abc", "chars1") == 3


def test_budget_from_config():
    assert TokenBudget.from_config(128000).limit == 115200
    assert TokenBudget.from_config(128000, 1.0).limit == 128000
    with pytest.raises(ValueError):
        TokenBudget(0)


def test_worked_example_k4():
    # 500 uniform entries of 1000 tokens (500K total) against a 128K limit
    plan = divide(entries([1000] * 500), TokenBudget(128000))
    assert ideal_group_count(500_000, 128_000) == 4
    assert plan.k == 4
    assert [len(g) for g in plan.groups] == [128, 128, 128, 116]


def test_everything_fits():
    plan = divide(entries([100] * 10), TokenBudget(128000))
    assert plan.k == 1 and plan.per_group_tokens == (1000,)


def test_greedy_by_hand():
    plan = divide(entries([60] * 5), TokenBudget(128))
    assert [len(g) for g in plan.groups] == [2, 2, 1]
    assert plan.per_group_tokens == (120, 120, 60)


def test_overhead_reduces_room():
    plan = divide(entries([60] * 5), TokenBudget(128), fixed_overhead_tokens=10)
    assert [len(g) for g in plan.groups] == [1, 1, 1, 1, 1]


def test_entry_exceeding_budget():
    with pytest.raises(EntryExceedsBudget):
        divide(entries([60, 200]), TokenBudget(128))
    with pytest.raises(EntryExceedsBudget):
        divide(entries([60]), TokenBudget(128), fixed_overhead_tokens=100)


def test_empty_input():
    assert divide([], TokenBudget(10)) == DivisionPlan((), ())
    assert single_group([]).k == 0


def test_single_group_keeps_order():
    es = entries([5, 500, 50])
    plan = single_group(es)
    assert plan.k == 1 and plan.flatten() == [m for m, _ in es]
    assert plan.per_group_tokens == (555,)


def check_plan(es, limit, overhead, plan):
    assert plan.flatten() == [m for m, _ in es]  # partition + order preservation
    assert plan.k <= max(1, len(es))
    for g, t in zip(plan.groups, plan.per_group_tokens):
        assert g
        assert t + overhead <= limit
        assert t == sum(count_tokens(dict(es)[m]) for m in g)
    # greedy: the first entry of each group would not have fitted in the previous group
    size = {m: count_tokens(text) for m, text in es}
    for prev, t, nxt in zip(plan.groups, plan.per_group_tokens, plan.groups[1:]):
        assert t + size[nxt[0]] + overhead > limit


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(1, 60), max_size=40), st.integers(60, 400), st.integers(0, 50))
def test_division_invariants(sizes, limit, overhead):
    limit = max(limit, max(sizes, default=0) + overhead)
    es = entries(sizes)
    plan = divide(es, TokenBudget(limit), overhead)
    check_plan(es, limit, overhead, plan)
    assert divide(es, TokenBudget(limit), overhead) == plan


def random_ochiai_entries(rng):
    n_tests, n_methods = rng.randint(2, 8), rng.randint(1, 30)
    failed = [rng.random() < 0.4 for _ in range(n_tests)]
    failed[0] = True
    bits = [[rng.random() < 0.5 for _ in range(n_tests)] for _ in range(n_methods)]
    for b in bits:
        b[rng.randrange(n_tests)] = True
    spectra = "".join(f"p$C{j}#m()\n" for j in range(n_methods))
    matrix = "".join(" ".join("1" if bits[j][t] else "0" for j in range(n_methods)) + (" -\n" if failed[t] else " +\n")
                     for t in range(n_tests))
    tests = "".join(f"T{t},{'fail' if failed[t] else 'pass'}\n" for t in range(n_tests))
    m = parse_spectra(spectra, matrix, tests)
    score = {s.method: s.score for s in ochiai(m)}
    order = rank_by(m, "ochiai")
    return [(mid, "y" * rng.randint(1, 200)) for mid in order], score


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sorted_across_groups(seed):
    rng = random.Random(seed)
    es, score = random_ochiai_entries(rng)
    plan = divide(es, TokenBudget(rng.randint(50, 300)))
    for a, b in zip(plan.groups, plan.groups[1:]):
        assert min(score[m] for m in a) >= max(score[m] for m in b)


def test_ideal_group_count():
    assert ideal_group_count(0, 10) == 1
    assert ideal_group_count(10, 10) == 1
    assert ideal_group_count(11, 10) == 2
    assert ideal_group_count(500_000, 128_000) == math.ceil(500 / 128)
