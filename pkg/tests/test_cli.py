"""Command line surface, exercised in-process through click's runner."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from chartquery.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def test_translate_prints_task_text(runner):
    result = runner.invoke(
        main, ["translate", "energy", "What was the consumption of gas in 2020?"]
    )
    assert result.exit_code == 0, result.output
    assert result.output.strip() == (
        "(identify consumption; filter: energy type = gas, year = 2020)"
    )


def test_translate_tree_output(runner):
    result = runner.invoke(
        main,
        ["translate", "energy", "How did consumption change over time?", "--tree"],
    )
    assert result.exit_code == 0
    assert json.loads(result.output)["kind"] == "trend"


def test_translate_failure_names_the_stage(runner):
    result = runner.invoke(main, ["translate", "energy", "zoom in please"])
    assert result.exit_code != 0
    assert "translate: UnparseableQuery" in result.output


def test_plan_emits_step_json(runner):
    result = runner.invoke(
        main, ["plan", "energy", "What was the consumption of gas in 2020?"]
    )
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert [s["kind"] for s in payload["plan"]] == [
        "highlight",
        "reduce",
        "rescale",
        "annotate",
    ]


def test_spec_argument_accepts_a_file(runner, tmp_path):
    from chartquery.chart.model import spec_to_json
    from chartquery.demo import energy_spec

    path = tmp_path / "chart.json"
    path.write_text(json.dumps(spec_to_json(energy_spec())))
    result = runner.invoke(
        main, ["translate", str(path), "What is the sum of coal and solar?"]
    )
    assert result.exit_code == 0
    assert "sum(coal, solar)" in result.output


def test_unknown_spec_source_fails_cleanly(runner):
    result = runner.invoke(main, ["translate", "no-such-chart", "anything"])
    assert result.exit_code != 0
    assert "neither a file nor a bundled demo chart" in result.output


def test_render_writes_keyframes(runner, tmp_path):
    out = tmp_path / "frames"
    result = runner.invoke(
        main,
        [
            "render",
            "energy",
            "What was the consumption of gas in 2020?",
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    svgs = sorted(p.name for p in out.glob("frame-*.svg"))
    assert svgs == [f"frame-{i:03d}.svg" for i in range(5)]
    plan_doc = json.loads((out / "plan.json").read_text())
    assert len(plan_doc["plan"]) == 4


def test_gen_dataset_and_evaluate_round_trip(runner, tmp_path):
    data = tmp_path / "tiny.jsonl"
    gen = runner.invoke(
        main,
        ["gen-dataset", "-n", "40", "--seed", "7", "--out", str(data), "--stats"],
    )
    assert gen.exit_code == 0, gen.output
    assert sum(1 for _ in data.open()) == 40

    ev = runner.invoke(main, ["evaluate", "--dataset", str(data), "--seed", "7"])
    assert ev.exit_code == 0, ev.output
    overall = ev.output.strip().splitlines()[-1]
    assert overall.startswith("| overall | 40 |")
    assert "100.0" in overall


def test_evaluate_json_report(runner, tmp_path):
    data = tmp_path / "tiny.jsonl"
    runner.invoke(main, ["gen-dataset", "-n", "25", "--out", str(data)])
    out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        ["evaluate", "--dataset", str(data), "--report", "json", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["count"] == 25
    assert report["means"]["literal"] == 100.0


def test_demo_spec_dumps_a_loadable_document(runner):
    from chartquery.chart.model import load_chart_spec

    result = runner.invoke(main, ["demo-spec", "covid"])
    assert result.exit_code == 0
    spec = load_chart_spec(json.loads(result.output))
    assert spec.title and len(spec.rows) > 6000


def test_show_prints_svg(runner):
    result = runner.invoke(main, ["show", "energy"])
    assert result.exit_code == 0
    assert result.output.startswith("<svg")
