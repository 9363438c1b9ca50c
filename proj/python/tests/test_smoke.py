import math

import pytest

import costorch


def small_problem(deadline=10.0):
    return {
        "format_version": 1,
        "workflows": [{"id": "w", "earliest_start": 0, "deadline": deadline, "predecessors": []}],
        "devices": [{"id": "d", "base_rate": 1, "overflow_rate": 2, "prepurchased_hours": 0}],
        "configs": [
            {"device_id": "d", "config_id": "k1", "device_count": 1},
            {"device_id": "d", "config_id": "k2", "device_count": 1},
        ],
        "durations": [
            {"workflow_id": "w", "device_id": "d", "config_id": "k1", "hours": 10},
            {"workflow_id": "w", "device_id": "d", "config_id": "k2", "hours": 8},
        ],
    }


def test_solve_picks_cheaper_config():
    doc = costorch.solve(small_problem())
    assert doc["assignment"] == [{"workflow_id": "w", "device_id": "d", "config_id": "k2"}]
    assert doc["cost"]["total"] == pytest.approx(16.0)
    assert doc["solve"]["status"] == "optimal"


def test_infeasible_returns_none():
    assert costorch.solve(small_problem(deadline=5)) is None
    assert costorch.brute_force(small_problem(deadline=5)) is None


def test_solver_matches_brute_force():
    for seed in range(5):
        p = costorch.generate_problem(seed, workflows=4)
        assert costorch.solve(p)["cost"]["total"] == pytest.approx(costorch.brute_force(p)["cost"]["total"], abs=1e-9)


def test_validation_and_errors():
    p = small_problem()
    p["workflows"][0]["predecessors"] = ["w"]
    out = costorch.validate(p)
    assert not out["valid"]
    assert out["issues"][0]["kind"] == "CycleDetected"
    with pytest.raises(costorch.ValidationFailed):
        costorch.solve(p)
    del p["workflows"][0]["deadline"]
    with pytest.raises(costorch.SchemaError, match="workflows\\[0\\].deadline"):
        costorch.validate(p)
    with pytest.raises(costorch.Error):
        costorch.solve("{not json")


def test_cost_and_schedule():
    p = small_problem()
    assert costorch.evaluate_cost(p, {"w": ("d", "k1")})["total"] == pytest.approx(20.0)
    assert costorch.earliest_schedule(p, {"w": ("d", "k1")})["finish"] == {"w": 10.0}
    late = costorch.earliest_schedule(small_problem(deadline=9), {"w": ("d", "k1")})
    assert late == {"feasible": False, "deficits": {"w": 1.0}}
    assert costorch.tiered_cost(15, 10, 1, 2) == pytest.approx(20.0)


def test_metrics():
    assert costorch.compute_ccr(52.6e3, 42.6e3) == pytest.approx(0.1901, abs=5e-5)
    assert costorch.compute_throughput(10, 2.0) == 5.0
    assert costorch.compute_reliability(9, 1, 10) == 1.0
    with pytest.raises(costorch.ZeroInitialCost):
        costorch.compute_ccr(0, 1)
    m = costorch.regression_metrics([100, 200], [90, 220])
    assert (m["mae"], m["mse"], m["mape"]) == (15.0, 250.0, pytest.approx(10.0))
    assert math.isclose(m["rmse"] ** 2, m["mse"])


def test_model_pipeline():
    records = costorch.generate_records(300, seed=1)
    assert records.startswith("job_id,cpu_cores,memory_gb")
    tuned = costorch.tune(records, "ridge", seed=2)
    assert 0.01 <= tuned["best_alpha"] <= 10
    model = costorch.fit(records, "ridge", tuned["best_alpha"])
    filled = costorch.predict_durations(model, costorch.generate_problem(3))
    assert len(filled["durations"]) == len(filled["workflows"]) * len(filled["configs"])
    assert costorch.solve(filled) is not None
    with pytest.raises(costorch.BadEnum):
        costorch.fit(records.replace("io_intensive", "gpu", 1))


def test_report_and_cli():
    log = {
        "format_version": 1,
        "problem": small_problem(),
        "assignment": [{"workflow_id": "w", "device_id": "d", "config_id": "k2"}],
        "elapsed_s": 2.0,
        "outcomes": [{"workflow_id": "w", "status": "success"}],
    }
    r = costorch.report(log)
    assert r["cost_change_rate"] == pytest.approx(0.2)
    code, out, _ = costorch.run_cli(["gen", "problem", "--seed", "4"])
    assert code == 0
    assert costorch.normalize_problem(out) == costorch.generate_problem(4)
    assert costorch.run_cli(["bogus"])[0] == 2
