import logging
import math
import os
from typing import Optional, Sequence

import mlflow

from .experiment import ErrorReportRow, Experiment

logger = logging.getLogger(__name__)

EXPERIMENT_NAME = "maxmin-exponential-sampling"


def track_table(exp: Experiment, rows: Sequence[ErrorReportRow], artifact: Optional[str] = None) -> str:
    """Log one error-table run to MLflow; returns the run id."""
    mlflow.set_tracking_uri(os.getenv("MLFLOW_TRACKING_URI", "http://localhost:5000"))
    mlflow.set_experiment(EXPERIMENT_NAME)
    with mlflow.start_run(run_name=exp.name or exp.function_id) as run:
        mlflow.log_params(
            {
                "function": exp.function_id,
                "kernel": exp.kernel,
                "interval": f"{exp.interval[0]},{exp.interval[1]}",
                "n_list": ",".join(str(n) for n in exp.n_list),
                "grid_points": exp.eval_grid_points,
                "range_policy": exp.range_policy,
                "quadrature": f"{exp.quadrature.rule}:{exp.quadrature.points}:{exp.quadrature.max_panel:g}",
            }
        )
        for row in rows:
            if row.empty_window:
                continue
            for key, value in row.as_record().items():
                if key != "n" and math.isfinite(value):
                    mlflow.log_metric(key, float(value), step=row.n)
        if artifact and os.path.exists(artifact):
            mlflow.log_artifact(artifact)
        logger.info("tracked run %s in %s", run.info.run_id, EXPERIMENT_NAME)
        return run.info.run_id
