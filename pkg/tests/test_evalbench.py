import json
import logging

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import LANG5
from faultloc.agents import ABLATIONS, FULL, ORDERINGS
from faultloc.errors import InputError
from faultloc.evalbench import (
    GroundTruth,
    delta_percent,
    load_rankings,
    load_truth,
    parse_ranking_file,
    parse_truth,
    render_table,
    run_experiment,
    serialize_truth,
    top_n,
)
from faultloc.llm import MockBackend, RankedList
from faultloc.llm.simulated import SimulatedModel
from faultloc.spectra import MethodId

A, B, C = (MethodId.parse(f"p$K#{n}()") for n in "abc")
FILLER = [MethodId.parse(f"p$F#f{i}()") for i in range(12)]

# ranks of the faulty method in five hand-placed rankings; None means absent
FIVE_RANKS = [3, 1, 7, None, 2]
# counted by hand from the ranks above: a fault is a Top-N hit iff its rank <= N
FIVE_COUNTS = {1: 1, 3: 3, 5: 3, 10: 4}


def ranking(methods):
    return RankedList.from_methods([(m, "", None) for m in methods], "final")


def placed(rank):
    """A 12-entry ranking with the faulty method A at ``rank`` (or absent)."""
    methods = list(FILLER)
    if rank is not None:
        methods[rank - 1] = A
    return ranking(methods)


def five_fault_fixture():
    rankings = {f"F{i}": placed(r) for i, r in enumerate(FIVE_RANKS)}
    truth = [GroundTruth(f"F{i}", frozenset({A})) for i in range(len(FIVE_RANKS))]
    return rankings, truth


def test_five_fault_hand_count():
    report = top_n(*five_fault_fixture())
    assert report.per_fault == {"F0": 3, "F1": 1, "F2": 7, "F3": None, "F4": 2}
    assert report.top_n_counts == FIVE_COUNTS


def test_single_truth_semantics():
    r = {"X": ranking([A, B, C])}
    assert top_n(r, [GroundTruth("X", frozenset({B}))]).top_n_counts == {1: 0, 3: 1, 5: 1, 10: 1}
    r = {"X": ranking([C, B, A])}
    assert top_n(r, [GroundTruth("X", frozenset({A, C}))]).top_n_counts[1] == 1


def test_missing_ranking_is_a_miss(caplog):
    with caplog.at_level(logging.WARNING):
        report = top_n({}, [GroundTruth("X", frozenset({A}))])
    assert report.per_fault == {"X": None} and report.top_n_counts[10] == 0
    assert "no ranking for X" in caplog.text


def test_ground_truth_needs_methods():
    with pytest.raises(ValueError):
        GroundTruth("X", frozenset())
    with pytest.raises(InputError):
        parse_truth('[{"fault_id": "X", "faulty_methods": []}]')
    with pytest.raises(InputError):
        parse_truth("{")


_rankings = st.lists(st.permutations([A, B, C] + FILLER[:5]).map(ranking), min_size=1, max_size=8)


@given(_rankings, st.lists(st.sampled_from([A, B, C, FILLER[7]]), min_size=1, max_size=3, unique=True))
def test_monotone_in_n(rankings, faulty):
    rmap = {f"F{i}": r for i, r in enumerate(rankings)}
    truth = [GroundTruth(f"F{i}", frozenset(faulty)) for i in range(len(rankings) + 1)]  # one without ranking
    report = top_n(rmap, truth)
    counts = [report.top_n_counts[n] for n in (1, 3, 5, 10)]
    assert counts == sorted(counts) and counts[-1] <= len(truth)
    assert top_n(rmap, truth) == report


# published ablation table: (baseline, variant) counts and the printed percentages
ABLATION_CELLS = [
    (327, 273, -16.51), (425, 378, -11.06), (473, 409, -13.53), (494, 409, -17.21),
    (327, 251, -23.24), (425, 341, -19.76), (473, 365, -22.83), (494, 381, -22.87),
    (327, 290, -11.31), (425, 400, -5.88), (473, 436, -7.82), (494, 459, -7.09),
]


@pytest.mark.parametrize("ours,other,printed", ABLATION_CELLS)
def test_delta_matches_published_ablation(ours, other, printed):
    assert round(delta_percent(other, ours), 2) == printed


def test_delta_zero_baseline():
    assert delta_percent(3, 0) is None


def test_truth_roundtrip():
    truth = load_truth(LANG5 / "truth.json")
    text = serialize_truth(truth)
    assert parse_truth(text) == truth
    assert serialize_truth(parse_truth(text)) == text


def test_ranking_file_roundtrip(tmp_path):
    r = RankedList.from_methods([(A, "throws", "guard it"), (B, "caller", "none")], "final")
    doc = {"fault_id": "X", "stage": "final", "ranking": r.to_json_entries(), "config": {}}
    text = json.dumps(doc, indent=2)
    fid, parsed, _ = parse_ranking_file(text)
    assert fid == "X" and parsed == r
    assert json.dumps({**doc, "ranking": parsed.to_json_entries()}, indent=2) == text
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "x.json").write_text(text)
    (tmp_path / "notes.json").write_text('{"unrelated": true}')
    assert load_rankings(tmp_path) == {"X": r}


def test_render_table_columns():
    rankings, truth = five_fault_fixture()
    table = run_table_rows(rankings, truth)
    header = table.splitlines()[0].split()
    assert header == ["Configuration", "Top-1", "Top-3", "Top-5", "Top-10"]
    assert "(-100.00%)" in table


def run_table_rows(rankings, truth):
    from faultloc.evalbench import ExperimentRow
    base = top_n(rankings, truth)
    worse = top_n({}, truth)
    rows = [ExperimentRow("full", FULL, base, {n: 0.0 for n in base.top_n_counts}),
            ExperimentRow("none", FULL, worse, {n: delta_percent(worse.top_n_counts[n], c)
                                                for n, c in base.top_n_counts.items()})]
    return render_table(rows)


def simulated(bundle, config):
    return MockBackend(responder=SimulatedModel())


@pytest.fixture(scope="module")
def three_fault_corpus(tmp_path_factory):
    from faultloc.synthetic import write_corpus
    root = tmp_path_factory.mktemp("three")
    write_corpus(root, count=3, seed=11, record=False)
    return root


def test_two_configs_give_two_rows(three_fault_corpus):
    table = run_experiment(three_fault_corpus, {"full": FULL, "w/o CodeNav": ABLATIONS["w/o CodeNav"]}, simulated)
    assert [r.name for r in table.rows] == ["full", "w/o CodeNav"]
    assert all(r.report.fault_count == 3 for r in table.rows)
    assert table.rows[0].deltas == {1: 0.0, 3: 0.0, 5: 0.0, 10: 0.0}
    doc = table.to_dict()
    assert doc["baseline"] == "full" and len(doc["rows"]) == 2


def test_ordering_sweep_has_three_rows(three_fault_corpus):
    table = run_experiment(three_fault_corpus, ORDERINGS, simulated)
    assert [r.name for r in table.rows] == ["order=execution", "order=ochiai", "order=external"]
    assert len(table.render().splitlines()) == 5


def test_per_fault_errors_recorded(three_fault_corpus):
    def broken(bundle, config):
        return MockBackend.from_script([])

    table = run_experiment(three_fault_corpus, {"full": FULL}, broken)
    assert len(table.rows[0].errors) == 3
    assert table.rows[0].report.top_n_counts[10] == 0


def test_division_ablation_lowers_top1(synth_corpus):
    # the simulated model only reads the first few methods of each prompt group, so one
    # long undivided group hides suspicious methods that division would surface
    configs = {"full": FULL.replace(token_limit=4000),
               "w/o Division": ABLATIONS["w/o Division"].replace(token_limit=4000)}
    table = run_experiment(synth_corpus, configs, simulated)
    full, nodiv = (r.report.top_n_counts[1] for r in table.rows)
    assert nodiv < full
    assert table.rows[1].deltas[1] < 0


def test_parallel_jobs_match_serial(three_fault_corpus):
    serial = run_experiment(three_fault_corpus, {"full": FULL}, simulated)
    parallel = run_experiment(three_fault_corpus, {"full": FULL}, simulated, jobs=3)
    assert serial.rows[0].report == parallel.rows[0].report
