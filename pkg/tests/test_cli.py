import pytest

from entryway.cli import main
from entryway.lbph import Mode, load_model_file
from entryway.registry import MODEL_FILENAMES


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    root = tmp_path_factory.mktemp("desk")
    assert main(["synth", str(root), "--frames", "10", "--probe-count", "3"]) == 0
    return root


def test_synth_layout(desk):
    assert (desk / "alice" / "0000.pgm").exists()
    assert (desk / "probes" / "visitor1_p000.pgm").exists()
    manifest = (desk / "eval_manifest.tsv").read_text().splitlines()
    assert manifest[0] == "path\tsubject\texpression\tmasked\tregistered"
    assert len(manifest) > 1


def test_train_deterministic(desk, tmp_path):
    out1, out2 = tmp_path / "m1", tmp_path / "m2"
    assert main(["train", str(desk), str(out1), "--exclude-holdout"]) == 0
    assert main(["train", str(desk), str(out2), "--exclude-holdout"]) == 0
    for mode in Mode:
        b1 = (out1 / MODEL_FILENAMES[mode]).read_bytes()
        b2 = (out2 / MODEL_FILENAMES[mode]).read_bytes()
        assert b1 == b2  # byte-identical retrain
    model = load_model_file(out1 / MODEL_FILENAMES[Mode.FULL_FACE])
    assert len(model) == 4 * 8  # 10 frames minus 2 holdout, 4 users


def test_eval_both_modes(desk, tmp_path, capsys):
    models = tmp_path / "m"
    main(["train", str(desk), str(models), "--exclude-holdout"])
    report = tmp_path / "trials.csv"
    assert main(["eval", str(desk / "eval_manifest.tsv"), str(models),
                 "--mode", "both", "--report", str(report)]) == 0
    out = capsys.readouterr().out
    assert "full_face" in out and "occluded" in out
    assert "accuracy" in out
    assert report.exists()
    header = report.read_text().splitlines()[0]
    assert header.startswith("path,subject,mode")


def test_eval_missing_manifest(tmp_path):
    assert main(["eval", str(tmp_path / "nope.tsv"), str(tmp_path)]) == 2


def test_sweep_cli(desk, tmp_path, capsys):
    models = tmp_path / "m"
    main(["train", str(desk), str(models), "--exclude-holdout"])
    assert main(["sweep", str(desk / "alice" / "0000.pgm"), str(models),
                 "--scales", "1.0", "0.5", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "maximum-distance analog" in out


def test_run_scenario_cli(tmp_path, capsys):
    scenario = tmp_path / "s.txt"
    scenario.write_text("@0 motion\n@1 recognized alice 51\n")
    assert main(["run", str(scenario), "--pin", "alice=7816"]) == 0
    out = capsys.readouterr().out
    assert "PHASE recognizing->await_pin" in out


def test_run_bad_pin_spec(tmp_path):
    scenario = tmp_path / "s.txt"
    scenario.write_text("@0 motion\n")
    assert main(["run", str(scenario), "--pin", "alice"]) == 2
