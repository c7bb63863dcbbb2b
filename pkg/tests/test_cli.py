import json

from fairloop.cli import main
from fairloop.simulator import spec_to_json, table2_spec


def test_bootstrap_writes_model_and_labels(tmp_path, capsys):
    data_dir = tmp_path / "svc"
    assert main(["bootstrap", "--data-dir", str(data_dir), "--dim", "4"]) == 0
    assert (data_dir / "model.txt").exists()
    assert (data_dir / "labels.tsv").read_text().startswith("1\tman,woman,non-binary")
    assert "model v1" in capsys.readouterr().out


def test_simulate_end_to_end(tmp_path, capsys):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_to_json(table2_spec(seed=3))))
    behavior_path = tmp_path / "behavior.json"
    behavior_path.write_text('{"participation": 1.0, "consent_rate": 0.0}')
    policy_path = tmp_path / "policy.cfg"
    policy_path.write_text("interval=200\ntheta=0.8\n")
    out_dir = tmp_path / "out"

    code = main(
        [
            "simulate",
            "--spec", str(spec_path),
            "--behavior", str(behavior_path),
            "--policy", str(policy_path),
            "--epochs", "2",
            "--seed", "7",
            "--out", str(out_dir),
        ]
    )
    assert code == 0
    for name in ("tpr_by_group.csv", "utility.csv", "sessions.jsonl", "decisions.csv"):
        assert (out_dir / name).exists()
    summary = json.loads(capsys.readouterr().out)
    assert summary["epochs"] == 2
    assert len(summary["session_accuracy"]) == 2
    assert len((out_dir / "sessions.jsonl").read_text().splitlines()) == 400
