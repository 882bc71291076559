import os

import numpy as np
import pytest

from cli import utilities
from cli.app import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, build_parser, main
from cli.controller import Controller
from src.models import DesignFile, ScanWindow

CONFIG_PATH = "test/configs/config.yaml"
WINDOW = ScanWindow(
    die="die1", axis="x", cv_start=100, cv_stop=300, exposure_start=120, exposure_stop=280
)


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory) -> str:
    out = str(tmp_path_factory.mktemp("demo"))
    assert main(["--config", CONFIG_PATH, "--out", out, "--log-level", "WARNING", "demo"]) == 0
    return out


class TestCsv:
    def test_trace_round_trip(self, tmp_path, make_trace):
        rng = np.random.default_rng(3)
        trace = make_trace("extended", rng.normal(scale=1e-7, size=(400, 3)), [WINDOW])
        trace.u_fm[:, 1] = rng.normal(size=400)
        provenance = utilities.trace_provenance(trace, "cfg", "dsg")
        path = utilities.write_csv(
            utilities.trace_frame(trace), str(tmp_path / "trace.csv"), provenance
        )

        frame, header = utilities.read_csv(path)
        assert header["config_hash"] == "cfg" and header["design_hash"] == "dsg"
        assert "e[rz]" in frame.columns and "modal[9]" in frame.columns
        restored = utilities.frame_trace(frame, header)
        assert restored.label == "extended" and restored.flex_enabled
        assert restored.ts == trace.ts
        assert restored.windows == [WINDOW]
        np.testing.assert_allclose(restored.e, trace.e, rtol=1e-12)
        np.testing.assert_allclose(restored.u_fm, trace.u_fm, rtol=1e-12)

    def test_provenance_lines_precede_the_header(self, tmp_path, make_trace):
        trace = make_trace("baseline", np.zeros((10, 3)), [])
        path = utilities.write_csv(
            utilities.trace_frame(trace), str(tmp_path / "nested" / "t.csv"), {"a": "1"}
        )
        with open(path) as f:
            lines = f.read().splitlines()
        assert lines[0] == "# a=1"
        assert lines[1].startswith("t,p[q_x],p[q_y],")

    def test_design_file_round_trip(self, tmp_path, settings, design_data):
        design = DesignFile(
            config_hash=settings.config_hash(),
            bank=design_data.bank,
            scheme=design_data.scheme,
            flex_gains=design_data.flex_gains,
            bandpass=design_data.bandpass,
            rb_design=design_data.rb_design,
        )
        digest = design.write(str(tmp_path / "design.yaml"))
        restored = DesignFile.read(str(tmp_path / "design.yaml"))
        assert restored.digest() == digest
        np.testing.assert_array_equal(restored.flex_gains.k_d, design.flex_gains.k_d)
        assert restored.bank.n == 9


class TestCommands:
    def test_every_command_is_registered(self):
        parser = build_parser()
        assert parser.parse_args(["design"]).command == "design"
        for command in ("simulate", "frf", "fit-weights"):
            assert parser.parse_args([command, "--design", "d.yaml"]).design == "d.yaml"
        assert parser.parse_args(["metrics", "a.csv", "b.csv"]).traces == ["a.csv", "b.csv"]
        assert parser.parse_args(["simulate", "--design", "d", "--flex", "on"]).flex == "on"

    def test_missing_config(self, tmp_path):
        code = main(["--config", str(tmp_path / "none.yaml"), "--out", str(tmp_path), "design"])
        assert code == EXIT_CONFIG

    def test_strict_constraints(self, tmp_path):
        code = main(
            ["--config", CONFIG_PATH, "--out", str(tmp_path), "--strict-constraints", "design"]
        )
        assert code == EXIT_INFEASIBLE
        assert not os.path.exists(tmp_path / "design.yaml")

    def test_reference_page(self, tmp_path):
        assert main(["--out", str(tmp_path), "reference"]) == EXIT_OK
        text = (tmp_path / "config.md").read_text()
        assert "| `observer.ts` |" in text
        assert "STAGECTL__" in text
        assert "| `rb_control.axes` |" in text
        assert "instead of 120 Hz" in text

    def test_flags_adjust_the_settings(self):
        settings = Controller.load_settings(
            CONFIG_PATH, seed=7, flex="off", strict_constraints=True
        )
        assert settings.sim.seed == 7
        assert settings.sim.flex == "off"
        assert settings.weighting.strict_constraints


class TestDemo:
    def test_report_files(self, demo_dir):
        for name in (
            "design.yaml",
            "bank.csv",
            "frf.csv",
            "suppression.csv",
            "reference.csv",
            "trace_baseline.csv",
            "trace_extended.csv",
            "metrics.csv",
            "cps.csv",
            "comparison.csv",
            "die3_error.csv",
        ):
            assert os.path.exists(os.path.join(demo_dir, name)), name

    def test_extended_loop_improves_the_scan(self, demo_dir):
        table, header = utilities.read_csv(os.path.join(demo_dir, "comparison.csv"))
        assert header["design_hash"]
        x_rows = table[table["axis"] == "x"]
        assert len(x_rows) == 5
        assert x_rows["msd_ratio"].mean() < 1.0
        assert (x_rows["cps_step_reduction_db"] > 3.0).all()

    def test_traces_carry_the_design_hash(self, demo_dir):
        design = DesignFile.read(os.path.join(demo_dir, "design.yaml"))
        for label in ("baseline", "extended"):
            _, header = utilities.read_csv(os.path.join(demo_dir, f"trace_{label}.csv"))
            assert header["design_hash"] == design.digest()
            assert header["label"] == label

    def test_metrics_command_on_recorded_traces(self, demo_dir, tmp_path):
        traces = [
            os.path.join(demo_dir, f"trace_{label}.csv") for label in ("baseline", "extended")
        ]
        code = main(["--config", CONFIG_PATH, "--out", str(tmp_path), "metrics", *traces])
        assert code == EXIT_OK
        table, _ = utilities.read_csv(str(tmp_path / "comparison.csv"))
        assert set(table["die"]) == {f"die{i}" for i in range(1, 6)}

    def test_fit_weights_on_a_recorded_trace(self, demo_dir, tmp_path):
        code = main(
            [
                "--config",
                CONFIG_PATH,
                "--out",
                str(tmp_path),
                "fit-weights",
                "--design",
                os.path.join(demo_dir, "design.yaml"),
                "--training-trace",
                os.path.join(demo_dir, "trace_baseline.csv"),
            ]
        )
        assert code == EXIT_OK
        refit = DesignFile.read(str(tmp_path / "design.yaml"))
        assert refit.training_samples is not None
        assert refit.scheme.trained

    def test_repeated_scan_is_byte_identical(self, demo_dir, tmp_path):
        design = os.path.join(demo_dir, "design.yaml")
        args = ["--config", CONFIG_PATH, "--out", str(tmp_path), "simulate", "--design", design]
        code = main(args)
        assert code == EXIT_OK
        for name in ("trace_baseline.csv", "trace_extended.csv", "reference.csv"):
            with open(os.path.join(demo_dir, name), "rb") as a, open(tmp_path / name, "rb") as b:
                assert a.read() == b.read(), name
