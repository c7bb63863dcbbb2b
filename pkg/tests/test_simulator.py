import json

import numpy as np
import pytest

from fairloop import (
    GenderLabel,
    UpdatePolicy,
    evaluate,
    initial_label_set,
)
from fairloop.labels import UNCLASSIFIABLE
from fairloop.simulator import (
    FeedbackBehavior,
    GroupSpec,
    InvalidSpec,
    PopulationSpec,
    calibrate,
    error_gap_spec,
    expected_group_rate,
    generate_stream,
    load_behavior,
    load_spec,
    make_reference_model,
    run_scenario,
    spec_from_json,
    spec_to_json,
    table2_spec,
)

MAN, WOMAN, NON_BINARY = GenderLabel("man"), GenderLabel("woman"), GenderLabel("non-binary")


def one_group_spec(base_rate, seed=9, truth=MAN, weight=1.0):
    return PopulationSpec(groups=(GroupSpec("g", weight, truth, base_rate=base_rate),), seed=seed)


# --- spec validation -----------------------------------------------------------


def test_weights_must_sum_to_one():
    with pytest.raises(InvalidSpec):
        PopulationSpec(groups=(GroupSpec("a", 0.7, MAN, base_rate=0.9),), seed=0)


def test_tags_must_be_distinct():
    with pytest.raises(InvalidSpec):
        PopulationSpec(
            groups=(
                GroupSpec("a", 0.5, MAN, base_rate=0.9),
                GroupSpec("a", 0.5, WOMAN, base_rate=0.9),
            ),
            seed=0,
        )


def test_base_rate_range_and_missing_placement():
    with pytest.raises(InvalidSpec):
        GroupSpec("a", 1.0, MAN, base_rate=1.2)
    with pytest.raises(InvalidSpec):
        GroupSpec("a", 1.0, MAN)  # neither rate nor center


def test_generate_stream_requires_resolved_centers():
    spec = one_group_spec(0.9)
    with pytest.raises(InvalidSpec):
        generate_stream(spec, 10)
    with pytest.raises(InvalidSpec):
        generate_stream(calibrate_spec(spec), 0)


def calibrate_spec(spec, seed=0):
    model, _ = make_reference_model(initial_label_set(), dim=spec.dim, seed=seed)
    return calibrate(spec, model)


# --- stream generation -----------------------------------------------------------


def test_stream_is_deterministic_under_seed():
    spec = calibrate_spec(one_group_spec(0.8))
    a = generate_stream(spec, 50)
    b = generate_stream(spec, 50)
    assert [r.id for r in a] == [r.id for r in b]
    for ra, rb in zip(a, b):
        np.testing.assert_array_equal(ra.raw, rb.raw)


def test_single_group_stream_shares_one_truth():
    spec = calibrate_spec(one_group_spec(0.8))
    stream = generate_stream(spec, 30)
    assert {r.truth for r in stream} == {MAN}
    assert {r.group for r in stream} == {"g"}
    assert all(r.region_present for r in stream)


def test_mixture_weights_respected():
    spec = PopulationSpec(
        groups=(
            GroupSpec("a", 0.8, MAN, center=tuple([3.0] + [0.0] * 15)),
            GroupSpec("b", 0.2, WOMAN, center=tuple([-3.0] + [0.0] * 15)),
        ),
        seed=5,
    )
    stream = generate_stream(spec, 4000)
    share = sum(1 for r in stream if r.group == "a") / 4000
    assert share == pytest.approx(0.8, abs=0.02)


# --- calibration -------------------------------------------------------------------


def test_analytic_rate_matches_monte_carlo():
    label_set = initial_label_set()
    model, _ = make_reference_model(label_set, seed=3)
    center = np.zeros(16)
    center[0] = 1.0
    analytic = expected_group_rate(center, 1.3, model, MAN)
    spec = PopulationSpec(
        groups=(GroupSpec("g", 1.0, MAN, center=tuple(center), spread=1.3),), seed=11
    )
    stream = generate_stream(spec, 20000)
    measured = evaluate(model, stream, label_set).accuracy
    assert measured == pytest.approx(analytic, abs=0.015)


@pytest.mark.parametrize("target", [0.705, 0.873, 0.983])
def test_calibrated_group_hits_target_rate(target):
    label_set = initial_label_set()
    model, _ = make_reference_model(label_set, seed=0)
    spec = calibrate(one_group_spec(target, seed=9), model)
    measured = evaluate(model, generate_stream(spec, 10000), label_set).accuracy
    assert measured == pytest.approx(target, abs=0.015)


def test_error_gap_spec_reproduces_the_gap():
    label_set = initial_label_set()
    model, _ = make_reference_model(label_set, seed=0)
    spec = calibrate(error_gap_spec(seed=9), model)
    tprs = evaluate(model, generate_stream(spec, 10000), label_set).tpr_by_group()
    gap = (1 - tprs["most-misclassified"]) - (1 - tprs["least-misclassified"])
    assert gap == pytest.approx(0.339, abs=0.02)


def test_calibration_requires_covered_truth():
    model, _ = make_reference_model(initial_label_set(), seed=0)
    spec = PopulationSpec(groups=(GroupSpec("g", 1.0, NON_BINARY, base_rate=0.9),), seed=0)
    with pytest.raises(InvalidSpec):
        calibrate(spec, model)


# --- scenario dynamics ----------------------------------------------------------------


def _policy(n=300):
    return UpdatePolicy(evaluation_interval=n)


def test_no_feedback_identity_exact():
    report = run_scenario(one_group_spec(0.8), FeedbackBehavior(), _policy(), epochs=2)
    for epoch in report.epochs:
        assert epoch.session_accuracy == epoch.classifier_accuracy
        assert {e["provenance"] for e in report.audit} == {"auto_confirmed"}


def test_feedback_dominance_without_adversaries():
    behavior = FeedbackBehavior(participation=0.6, confirm_rate=0.3)
    report = run_scenario(one_group_spec(0.7), behavior, _policy(), epochs=2)
    for epoch in report.epochs:
        assert epoch.session_accuracy >= epoch.classifier_accuracy


def test_adversarial_rate_monotonically_degrades_accuracy():
    accuracies = []
    for a in (0.0, 0.3, 0.7, 1.0):
        behavior = FeedbackBehavior(participation=0.5, adversarial_rate=a)
        report = run_scenario(one_group_spec(0.7), behavior, _policy(), epochs=1)
        accuracies.append(report.epochs[0].session_accuracy)
    assert all(b <= a for a, b in zip(accuracies, accuracies[1:]))
    assert accuracies[-1] < accuracies[0]
    assert accuracies[-1] == 0.0  # every adversarial final label is wrong


def test_scenario_deterministic():
    behavior = FeedbackBehavior(participation=0.4, consent_rate=0.5, confirm_rate=0.2)
    a = run_scenario(one_group_spec(0.75), behavior, _policy(), epochs=2)
    b = run_scenario(one_group_spec(0.75), behavior, _policy(), epochs=2)
    assert a.audit == b.audit
    assert a.session_accuracies() == b.session_accuracies()
    assert [e.snapshot for e in a.epochs] == [e.snapshot for e in b.epochs]


def test_post_feedback_accuracy_analytic_oracle_small():
    b, p = 0.7, 0.5
    behavior = FeedbackBehavior(participation=p)
    report = run_scenario(one_group_spec(b), behavior, _policy(2000), epochs=1)
    epoch = report.epochs[0]
    measured_b = epoch.classifier_accuracy
    # oracle against the measured base rate is exact up to participation sampling
    assert epoch.session_accuracy == pytest.approx(measured_b + (1 - measured_b) * p, abs=0.02)


def test_declining_population_is_excluded_and_raises_incompleteness():
    spec = PopulationSpec(
        groups=(
            GroupSpec("men", 0.8, MAN, base_rate=0.95),
            GroupSpec("refusers", 0.2, UNCLASSIFIABLE, center=tuple([0.0] * 16)),
        ),
        seed=4,
    )
    behavior = FeedbackBehavior(participation=1.0)
    report = run_scenario(spec, behavior, _policy(), epochs=1)
    epoch = report.epochs[0]
    provenances = {e["provenance"] for e in report.audit}
    assert "user_declined" in provenances
    declined = sum(1 for e in report.audit if e["provenance"] == "user_declined")
    assert epoch.session_report.total == len(report.audit) - declined
    assert epoch.snapshot.incompleteness == pytest.approx(declined / len(report.audit))


def test_out_of_vocabulary_group_feeds_unknown_labels():
    spec = PopulationSpec(
        groups=(
            GroupSpec("men", 0.7, MAN, base_rate=0.95),
            GroupSpec("fluid", 0.3, GenderLabel("genderfluid"), center=tuple([0.0, 4.0] + [0.0] * 14)),
        ),
        seed=4,
    )
    behavior = FeedbackBehavior(participation=1.0)
    report = run_scenario(spec, behavior, _policy(), epochs=1)
    epoch = report.epochs[0]
    invalid = sum(1 for e in report.audit if e["provenance"] == "invalid_fallback")
    assert invalid > 0  # corrections to an unknown label fall back
    assert epoch.snapshot.incompleteness > 0.2  # and count as out-of-vocabulary


def test_write_outputs(tmp_path):
    behavior = FeedbackBehavior(participation=0.5, consent_rate=0.5)
    report = run_scenario(one_group_spec(0.8), behavior, _policy(), epochs=2)
    report.write_outputs(tmp_path)
    tpr_lines = (tmp_path / "tpr_by_group.csv").read_text().splitlines()
    assert tpr_lines[0] == "epoch,group,total,correct,tpr"
    assert len(tpr_lines) == 1 + 2  # one group, two epochs
    utility_lines = (tmp_path / "utility.csv").read_text().splitlines()
    assert utility_lines[0] == "t,accuracy,incompleteness,utility"
    sessions = [json.loads(l) for l in (tmp_path / "sessions.jsonl").read_text().splitlines()]
    assert len(sessions) == 600  # 300 resolutions per epoch
    assert sessions == report.audit


# --- spec files -----------------------------------------------------------------------


def test_spec_json_round_trip():
    spec = table2_spec(seed=13)
    again = spec_from_json(spec_to_json(spec))
    assert again == spec


def test_spec_json_handles_sentinel_and_centers():
    spec = PopulationSpec(
        groups=(
            GroupSpec("a", 0.5, UNCLASSIFIABLE, center=(0.0, 1.0), spread=2.0),
            GroupSpec("b", 0.5, MAN, base_rate=0.9),
        ),
        seed=3,
        dim=2,
    )
    again = spec_from_json(spec_to_json(spec))
    assert again == spec
    assert again.groups[0].truth is UNCLASSIFIABLE


def test_load_spec_and_behavior_files(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_to_json(table2_spec(seed=2))))
    assert load_spec(spec_path) == table2_spec(seed=2)
    behavior_path = tmp_path / "behavior.json"
    behavior_path.write_text('{"participation": 0.5, "consent_rate": 1.0}')
    behavior = load_behavior(behavior_path)
    assert behavior == FeedbackBehavior(participation=0.5, consent_rate=1.0)
