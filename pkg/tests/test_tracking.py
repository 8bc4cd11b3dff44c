"""
MLflow tracking of error tables (mlflow replaced by a mock module)
"""
import math
from unittest.mock import MagicMock

import pytest

from src.harness import tracking
from src.harness.experiment import ErrorReportRow, Experiment
from src.harness.tracking import EXPERIMENT_NAME, track_table


@pytest.fixture
def fake_mlflow(monkeypatch):
    fake = MagicMock()
    fake.start_run.return_value.__enter__.return_value.info.run_id = "run-123"
    monkeypatch.setattr(tracking, "mlflow", fake)
    monkeypatch.setenv("MLFLOW_TRACKING_URI", "file:///tmp/mlruns")
    return fake


def test_track_table_logs_params_and_metrics(fake_mlflow, tmp_path):
    artifact = tmp_path / "table.csv"
    artifact.write_text("n\n")
    nan = math.nan
    rows = [
        ErrorReportRow(n=10, gm_l1=0.3, mk_l1=0.2, gm_sup=0.5, mk_sup=0.4),
        ErrorReportRow(n=25, gm_l1=nan, mk_l1=0.1, gm_sup=nan, mk_sup=0.3),
        ErrorReportRow(n=45, gm_l1=nan, mk_l1=nan, gm_sup=nan, mk_sup=nan, empty_window=True),
    ]
    exp = Experiment(n_list=(10, 25, 45), name="table-f")

    run_id = track_table(exp, rows, artifact=str(artifact))

    assert run_id == "run-123"
    fake_mlflow.set_tracking_uri.assert_called_once_with("file:///tmp/mlruns")
    fake_mlflow.set_experiment.assert_called_once_with(EXPERIMENT_NAME)
    params = fake_mlflow.log_params.call_args.args[0]
    assert params["function"] == "f-piecewise" and params["n_list"] == "10,25,45"
    logged = {(c.args[0], c.kwargs["step"]) for c in fake_mlflow.log_metric.call_args_list}
    assert ("gm_l1", 10) in logged and ("mk_l1", 25) in logged
    assert ("gm_l1", 25) not in logged
    assert all(step != 45 for _, step in logged)
    fake_mlflow.log_artifact.assert_called_once_with(str(artifact))


def test_mlflow_is_a_module_attribute(fake_mlflow):
    assert tracking.mlflow is fake_mlflow
    track_table(Experiment(n_list=(10,)), [ErrorReportRow(n=10, gm_l1=0.3, mk_l1=0.2, gm_sup=0.5, mk_sup=0.4)])
    params = fake_mlflow.log_params.call_args.args[0]
    assert params["quadrature"] == "gauss-legendre:8:0.0625"
