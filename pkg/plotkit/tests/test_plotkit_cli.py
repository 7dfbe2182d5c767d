"""Command line behaviour: success paths, input validation, exit codes."""

from __future__ import annotations

import csv

import pytest

from plotkit import cli


def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture
def corpus(tmp_path):
    metric_rows = []
    for epoch in range(6):
        metric_rows.append([epoch, "receive_rate", repr(0.5 + 0.05 * epoch)])
        metric_rows.append([epoch, "avg_delay", repr(2.0 - 0.1 * epoch)])
    files = {
        "metrics": write_csv(
            tmp_path / "run_a" / "metrics.csv",
            ["epoch", "measure", "value"],
            metric_rows,
        ),
        "metrics_b": write_csv(
            tmp_path / "run_b" / "metrics.csv",
            ["epoch", "measure", "value"],
            metric_rows,
        ),
        "scores": write_csv(
            tmp_path / "score_dist.csv",
            ["epoch", "rank", "score"],
            [
                [epoch, rank, repr(10.0 / (epoch + 1) + rank)]
                for epoch in range(6)
                for rank in range(4)
            ],
        ),
        "comparison": write_csv(
            tmp_path / "comparison.csv",
            ["policy", "seed", "final_coverage", "final_delay"],
            [["topiary", 1, "0.9", "1.2"], ["random", 1, "0.7", "1.5"]],
        ),
        "sweep": write_csv(
            tmp_path / "sweep.csv",
            ["delay_weight", "seed", "final_coverage", "final_delay"],
            [["1000.0", 1, "1.0", "2e-4"], ["10000.0", 1, "1.0", "1e-4"]],
        ),
        "attack": write_csv(
            tmp_path / "attack_metrics.csv",
            [
                "epoch",
                "victim_topic_coverage",
                "victim_topic_delay",
                "attacker_outgoing_fraction",
            ],
            [[epoch, "0.5", "1.0", "0.3"] for epoch in range(6)],
        ),
    }
    return files


KIND_TO_FILE = {
    "convergence-curves": "metrics",
    "score-distribution": "scores",
    "topology-comparison": "comparison",
    "parameter-sweep": "sweep",
    "attack-impact": "attack",
}


@pytest.mark.parametrize("kind", sorted(KIND_TO_FILE))
def test_each_kind_renders(kind, corpus, tmp_path, capsys):
    out = tmp_path / f"{kind}.svg"
    code = cli.main(
        ["plot", kind, "--in", str(corpus[KIND_TO_FILE[kind]]), "--out", str(out)]
    )
    assert code == 0
    assert out.stat().st_size > 0
    assert f"wrote {out}" in capsys.readouterr().out


def test_convergence_accepts_multiple_inputs(corpus, tmp_path):
    out = tmp_path / "multi.svg"
    code = cli.main(
        [
            "plot",
            "convergence-curves",
            "--in",
            str(corpus["metrics"]),
            str(corpus["metrics_b"]),
            "--out",
            str(out),
            "--labels",
            "run a",
            "run b",
        ]
    )
    assert code == 0
    assert out.stat().st_size > 0


def test_single_input_kinds_reject_multiple_files(corpus, tmp_path, capsys):
    code = cli.main(
        [
            "plot",
            "score-distribution",
            "--in",
            str(corpus["scores"]),
            str(corpus["scores"]),
            "--out",
            str(tmp_path / "fig.svg"),
        ]
    )
    assert code == 1
    assert "exactly one input file" in capsys.readouterr().err


def test_label_count_mismatch_is_an_error(corpus, tmp_path, capsys):
    code = cli.main(
        [
            "plot",
            "convergence-curves",
            "--in",
            str(corpus["metrics"]),
            "--out",
            str(tmp_path / "fig.svg"),
            "--labels",
            "a",
            "b",
        ]
    )
    assert code == 1
    assert "labels" in capsys.readouterr().err


def test_schema_mismatch_reports_columns(tmp_path, capsys):
    bad = write_csv(
        tmp_path / "metrics.csv",
        ["epoch", "value"],
        [[0, "0.5"]],
    )
    code = cli.main(
        [
            "plot",
            "convergence-curves",
            "--in",
            str(bad),
            "--out",
            str(tmp_path / "fig.svg"),
        ]
    )
    assert code == 1
    err = capsys.readouterr().err
    assert "error:" in err
    assert "missing measure" in err


def test_missing_file_reports_error(tmp_path, capsys):
    code = cli.main(
        [
            "plot",
            "parameter-sweep",
            "--in",
            str(tmp_path / "absent.csv"),
            "--out",
            str(tmp_path / "fig.svg"),
        ]
    )
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_kind_rejected_by_parser(tmp_path):
    with pytest.raises(SystemExit) as exc_info:
        cli.main(["plot", "mystery", "--in", "x.csv", "--out", "y.svg"])
    assert exc_info.value.code == 2


def test_default_labels_disambiguate_shared_stems(corpus):
    from pathlib import Path

    labels = cli._default_labels(
        [Path(corpus["metrics"]), Path(corpus["metrics_b"])]
    )
    assert labels == ["run_a/metrics", "run_b/metrics"]
