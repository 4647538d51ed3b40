import json

import pytest

HEADER = (
    "scenario,strategy,N,mean_snr_linear,mean_snr_db,stderr_linear,"
    "n_trials,seed,walltime_s"
)

FIG2_STRATEGIES = (
    "no-emi",
    "noise-optimal-with-emi:rho=10dB",
    "noise-optimal-with-emi:rho=20dB",
    "noise-optimal-with-emi:rho=30dB",
)

FIG4_STRATEGIES = (
    "noise-optimal-with-emi:beta_d=-inf",
    "noise-optimal-with-emi:beta_d=-100dB",
)


def sweep_csv_text(scenario, strategies, ns=(64, 256, 1024)):
    lines = [HEADER]
    for k, strategy in enumerate(strategies):
        for n in ns:
            linear = (1.0 + 0.1 * k) * n * 50.0
            db = 10.0 * __import__("math").log10(linear)
            lines.append(
                f"{scenario},{strategy},{n},{linear!r},{db!r},"
                f"{linear / 40.0!r},1000,7,0.0"
            )
    return "\n".join(lines) + "\n"


@pytest.fixture
def sweep_dir(tmp_path):
    """A directory shaped like the simulator CLI's --out: two scenario CSVs
    and a merged meta.json carrying an asymptote for the normalized one."""
    (tmp_path / "fig2.csv").write_text(
        sweep_csv_text("fig2", FIG2_STRATEGIES, ns=(16, 64, 256, 1024))
    )
    (tmp_path / "fig4.csv").write_text(sweep_csv_text("fig4", FIG4_STRATEGIES))
    meta = {
        "fig2": {
            "csv": "fig2.csv",
            "reference_lines": {},
            "errors": [],
        },
        "fig4": {
            "csv": "fig4.csv",
            "reference_lines": {
                "prop2_limit": 55.0,
                "alpha_estimate": 0.83,
                "alpha_estimation_trials": 10240,
            },
            "errors": [],
        },
    }
    (tmp_path / "meta.json").write_text(json.dumps(meta, indent=2))
    return tmp_path
