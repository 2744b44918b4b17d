import json

import numpy as np
import pytest

from krylreg.harness import (
    ExperimentSpec,
    emit_csv,
    emit_json,
    emit_summary_csv,
    records_to_json,
    run_experiment,
)

SMALL_SPEC = ExperimentSpec(
    problem="shaw",
    size=100,
    epsilons=(0.01,),
    seed=20240101,
    methods=("hyb_cgme",),
    max_outer_k=8,
)


def test_spec_validation():
    with pytest.raises(ValueError, match="no methods"):
        ExperimentSpec(problem="shaw", size=64, epsilons=(0.1,), seed=1, methods=())
    with pytest.raises(ValueError, match="epsilon"):
        ExperimentSpec(problem="shaw", size=64, epsilons=(1.5,), seed=1, methods=("cgme",))
    with pytest.raises(ValueError, match="unknown problem"):
        ExperimentSpec(problem="nope", size=64, epsilons=(0.1,), seed=1, methods=("cgme",))
    with pytest.raises(ValueError, match="unknown methods"):
        ExperimentSpec(problem="shaw", size=64, epsilons=(0.1,), seed=1, methods=("jbdqr",))


def test_run_experiment_single_record_interior_best():
    spec = ExperimentSpec(
        problem="shaw", size=400, epsilons=(0.01,), seed=20240101,
        methods=("hyb_tcgme",), max_outer_k=14,
    )
    records = run_experiment(spec)
    assert len(records) == 1
    rec = records[0]
    assert rec.error is None
    ks = [row.k for row in rec.rows]
    errs = [row.rel_error for row in rec.rows]
    best_pos = int(np.argmin(errs))
    assert rec.best_k == ks[best_pos]
    assert 0 < best_pos < len(errs) - 1


def test_run_experiment_isolates_failures():
    # size below the generator minimum: the build fails, runs are recorded
    spec = ExperimentSpec(
        problem="shaw", size=9, epsilons=(0.01,), seed=1,
        methods=("cgme", "hyb_cgme"), max_outer_k=3,
    )
    records = run_experiment(spec)
    assert len(records) == 2
    assert all(rec.error is not None for rec in records)
    assert all(not rec.rows for rec in records)


def test_emit_csv_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv([], path)
    assert path.read_text() == "method,problem,n,epsilon,seed,k,rel_error,inner_iters,wall_ms\n"
    spath = tmp_path / "empty-summary.csv"
    emit_summary_csv([], spath)
    assert spath.read_text() == "method,problem,epsilon,best_k,best_error,total_wall_ms\n"


def test_emit_csv_deterministic_bytes(tmp_path):
    paths = []
    for i in range(2):
        records = run_experiment(SMALL_SPEC)
        path = tmp_path / f"run{i}.csv"
        emit_csv(records, path, deterministic=True)
        spath = tmp_path / f"run{i}-summary.csv"
        emit_summary_csv(records, spath, deterministic=True)
        paths.append((path.read_bytes(), spath.read_bytes()))
    assert paths[0] == paths[1]


def test_json_roundtrip_mirrors_records(tmp_path):
    records = run_experiment(SMALL_SPEC)
    path = tmp_path / "run.json"
    emit_json(records, path)
    loaded = json.loads(path.read_text())
    assert len(loaded) == len(records)
    entry = loaded[0]
    rec = records[0]
    assert entry["method"] == rec.method
    assert entry["problem"] == rec.problem
    assert entry["epsilon"] == rec.epsilon
    assert entry["best_k"] == rec.best_k
    assert entry["best_error"] == rec.best_error
    assert [row["k"] for row in entry["rows"]] == [row.k for row in rec.rows]
    assert [row["rel_error"] for row in entry["rows"]] == [row.rel_error for row in rec.rows]


def test_records_to_json_deterministic_zeroes_timing():
    records = run_experiment(SMALL_SPEC)
    payload = json.loads(records_to_json(records, deterministic=True))
    assert payload[0]["total_wall_ms"] == 0.0
    assert all(row["wall_ms"] == 0.0 for row in payload[0]["rows"])


def test_blur2d_end_to_end_through_harness():
    spec = ExperimentSpec(
        problem="blur2d", size=16, epsilons=(0.01,), seed=4,
        methods=("hyb_cgme", "hyb_tcgme"), max_outer_k=6, psf_sigma=1.5,
    )
    records = run_experiment(spec)
    assert len(records) == 2
    for rec in records:
        assert rec.error is None
        assert len(rec.rows) == 6
        assert all(np.isfinite(row.rel_error) for row in rec.rows)
        # the correction runs a real inner solve against the 2-D stack
        assert sum(row.inner_iterations for row in rec.rows) > 0


def test_spec_from_dict_accepts_lists():
    spec = ExperimentSpec.from_dict(
        {
            "problem": "deriv2",
            "size": 64,
            "epsilons": [0.1, 0.01],
            "seed": 3,
            "methods": ["cgme", "hyb_tcgme"],
        }
    )
    assert spec.epsilons == (0.1, 0.01)
    assert spec.methods == ("cgme", "hyb_tcgme")
