"""Harness checks: sweeps, tables, serialization, performance profiles."""

import json
import math

import numpy as np
import pytest

from stlsbb import (
    AllFailedOnProblemError,
    ExperimentGrid,
    ProfileTable,
    RosenbrockTable,
    SweepCell,
    average_table,
    performance_profile,
    profile_from_cells,
    profile_from_matrix_csv,
    run_quadratic_sweep,
    run_rosenbrock_table,
    sweep_from_csv,
    sweep_to_csv,
    sweep_to_json,
)
from stlsbb.errors import InvalidParameterError
from stlsbb.harness import CAP_MARK, averages_to_csv, fmt17


class TestFmt17:
    def test_roundtrips_float64(self, rng):
        specials = [math.pi, 1.0 / 3.0, 1e-300, 1e300, 0.1, 2.0 / 3.0]
        for x in specials + list(rng.standard_normal(200)):
            assert float(fmt17(x)) == float(x)

    def test_plain_integers_stay_short(self):
        assert fmt17(2.0) == "2"


def make_cell(seed=0, policy="bb1", iterations=100, solved=True, status="ok",
              setting=1, kappa=1e3, epsilon=1e-6):
    return SweepCell(
        setting_id=setting, kappa=kappa, epsilon=epsilon, seed=seed, n=20,
        policy=policy, max_iter=500, iterations=iterations, solved=solved,
        status=status,
    )


class TestGrid:
    def test_cell_count(self):
        g = ExperimentGrid(
            n=20, setting_ids=(1, 2), kappas=(1e3, 1e4), epsilons=(1e-4,),
            seeds=(0, 1, 2), policies=("bb1", "bb2"),
        )
        assert g.cell_count() == 2 * 2 * 1 * 3 * 2

    def test_empty_axis_rejected(self):
        with pytest.raises(InvalidParameterError):
            ExperimentGrid(n=20, seeds=())

    def test_bad_epsilon_rejected(self):
        with pytest.raises(InvalidParameterError):
            ExperimentGrid(n=20, epsilons=(2.0,))

    def test_bad_policy_rejected_early(self):
        with pytest.raises(InvalidParameterError):
            ExperimentGrid(n=20, policies=("bb3",))


@pytest.fixture(scope="module")
def tiny():
    return ExperimentGrid(
        n=20, setting_ids=(1,), kappas=(500.0,), epsilons=(1e-4,),
        seeds=(0, 1), policies=("bb1", "gamma:1"), max_iter=5000,
    )


class TestSweep:
    def test_runs_all_cells_in_grid_order(self, tiny):
        cells = run_quadratic_sweep(tiny)
        assert len(cells) == tiny.cell_count()
        assert [c.seed for c in cells] == [0, 0, 1, 1]
        assert [c.policy for c in cells] == ["bb1", "gamma:1", "bb1", "gamma:1"]
        for c in cells:
            assert c.status == "ok" and c.solved
            assert 0 < c.iterations < tiny.max_iter

    def test_byte_identical_reruns(self, tiny):
        first = sweep_to_csv(run_quadratic_sweep(tiny))
        second = sweep_to_csv(run_quadratic_sweep(tiny))
        assert first == second

    def test_progress_callback(self, tiny):
        seen = []
        run_quadratic_sweep(tiny, progress=seen.append)
        assert len(seen) == tiny.cell_count()

    def test_csv_roundtrip(self, tiny):
        cells = run_quadratic_sweep(tiny)
        assert sweep_from_csv(sweep_to_csv(cells)) == cells

    def test_csv_header_enforced(self):
        with pytest.raises(InvalidParameterError):
            sweep_from_csv("a,b,c\n1,2,3\n")

    def test_json_shape(self, tiny):
        cells = run_quadratic_sweep(tiny)
        doc = json.loads(sweep_to_json(cells))
        assert doc["format"] == "stlsbb-sweep-v1"
        assert doc["stop_rule"] == "grad_rel"
        assert len(doc["cells"]) == len(cells)
        assert doc["cells"][0]["policy"] == "bb1"


class TestAverages:
    def test_hand_mean(self):
        cells = [
            make_cell(seed=0, iterations=10),
            make_cell(seed=1, iterations=20),
        ]
        rows = average_table(cells)
        assert len(rows) == 1
        assert rows[0]["mean_iterations"] == 15.0
        assert rows[0]["seeds"] == 2 and rows[0]["failed"] == 0

    def test_cap_counts_in_mean_and_failed(self):
        cells = [
            make_cell(seed=0, iterations=10),
            make_cell(seed=1, iterations=500, solved=False, status="cap"),
        ]
        rows = average_table(cells)
        assert rows[0]["mean_iterations"] == 255.0
        assert rows[0]["failed"] == 1

    def test_error_cells_excluded_from_mean(self):
        cells = [
            make_cell(seed=0, iterations=10),
            make_cell(seed=1, iterations=None, solved=False, status="error:X"),
        ]
        rows = average_table(cells)
        assert rows[0]["mean_iterations"] == 10.0
        assert rows[0]["failed"] == 1
        only_err = average_table(cells[1:])
        assert math.isnan(only_err[0]["mean_iterations"])

    def test_groups_split_by_policy(self):
        cells = [make_cell(policy="bb1"), make_cell(policy="bb2")]
        assert len(average_table(cells)) == 2

    def test_csv_writer(self):
        text = averages_to_csv(average_table([make_cell()]))
        lines = text.strip().split("\n")
        assert lines[0].startswith("#")
        assert lines[1].split(",")[0] == "setting"
        assert lines[2].split(",")[4] == "bb1"


class TestRosenbrockTable:
    def test_structure_and_accessor(self):
        table = run_rosenbrock_table(
            epsilons=(1e-1,), policies=("bb2", "gamma:1"), max_iter=300
        )
        assert table.epsilons == (1e-1,)
        for pol in table.policies:
            c = table.count(1e-1, pol)
            assert isinstance(c, int) and 0 < c <= 300

    def test_cap_marks(self):
        table = run_rosenbrock_table(
            epsilons=(1e-8,), policies=("bb2", "gamma:1"), max_iter=5
        )
        assert table.counts == ((None, None),)
        assert CAP_MARK in table.render()
        assert CAP_MARK in table.to_csv()

    def test_render_and_csv_agree(self):
        table = RosenbrockTable(
            epsilons=(0.1, 0.01), policies=("a", "b"),
            counts=((3, None), (7, 9)),
        )
        text = table.render()
        assert "a" in text and "b" in text and "--" in text and "7" in text
        rows = [r.split(",") for r in table.to_csv().strip().split("\n")[2:]]
        assert rows[1] == [fmt17(0.1), "b", "--"]
        assert rows[2] == [fmt17(0.01), "a", "7"]


class TestPerformanceProfile:
    def test_hand_ratios(self):
        table = performance_profile([[1.0, 2.0], [2.0, 2.0]], solvers=("a", "b"))
        assert np.array_equal(table.ratios, [[1.0, 2.0], [1.0, 1.0]])
        assert table.rho("a", 1.0) == 1.0
        assert table.rho("b", 1.0) == 0.5
        assert table.rho("b", 2.0) == 1.0
        assert table.rho(1, 1.999) == 0.5
        assert table.solve_fraction("a") == 1.0
        assert np.array_equal(table.thresholds(), [1.0, 2.0])

    def test_failure_column(self):
        table = performance_profile([[1.0, math.inf], [2.0, math.nan]])
        assert table.solve_fraction(1) == 0.0
        assert table.rho(1, 1e12) == 0.0
        assert table.solve_fraction(0) == 1.0

    def test_all_failed_row_raises(self):
        with pytest.raises(AllFailedOnProblemError):
            performance_profile([[math.inf, math.nan], [1.0, 2.0]])

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            performance_profile([1.0, 2.0])
        with pytest.raises(InvalidParameterError):
            performance_profile([[1.0], [2.0]])
        with pytest.raises(InvalidParameterError):
            performance_profile([[1.0, -2.0]])
        with pytest.raises(InvalidParameterError):
            performance_profile([[1.0, 2.0]], solvers=("only-one",))
        table = performance_profile([[1.0, 2.0]])
        with pytest.raises(InvalidParameterError):
            table.rho(0, 0.5)

    def test_input_array_is_copied(self):
        costs = np.array([[1.0, 2.0], [2.0, 4.0]])
        table = performance_profile(costs)
        costs[0, 0] = 99.0
        assert table.ratios[0, 0] == 1.0
        with pytest.raises((ValueError, RuntimeError)):
            table.ratios[0, 0] = 5.0

    def test_random_profiles_are_monotone_and_normalized(self, rng):
        for _ in range(100):
            costs = rng.integers(1, 1000, size=(8, 4)).astype(float)
            # knock out some cells but keep column 0 finite so every row
            # retains a best cost
            mask = rng.uniform(size=(8, 4)) < 0.25
            mask[:, 0] = False
            costs[mask] = math.inf
            table = performance_profile(costs)
            thetas = [1.0, 1.5, 2.0, 5.0, 100.0, 1e9]
            best_share = 0.0
            for j in range(4):
                rhos = [table.rho(j, th) for th in thetas]
                assert all(a <= b + 1e-15 for a, b in zip(rhos, rhos[1:]))
                assert all(0.0 <= r <= 1.0 for r in rhos)
                assert rhos[-1] == pytest.approx(table.solve_fraction(j))
                best_share += table.rho(j, 1.0)
            # someone is best on every problem (ties can push the sum past 1)
            assert best_share >= 1.0 - 1e-15

    def test_profile_csv_rows(self):
        table = performance_profile([[1.0, 2.0], [2.0, 2.0]], solvers=("a", "b"))
        lines = table.to_csv().strip().split("\n")
        assert lines[1] == "theta,a,b"
        assert lines[2] == f"{fmt17(1.0)},{fmt17(1.0)},{fmt17(0.5)}"
        assert lines[3] == f"{fmt17(2.0)},{fmt17(1.0)},{fmt17(1.0)}"


class TestProfileFromCells:
    def test_pivot_matches_direct_matrix(self):
        cells = [
            make_cell(seed=0, policy="bb1", iterations=10),
            make_cell(seed=0, policy="bb2", iterations=30),
            make_cell(seed=1, policy="bb1", iterations=40),
            make_cell(seed=1, policy="bb2", iterations=20),
        ]
        table = profile_from_cells(cells)
        want = performance_profile([[10.0, 30.0], [40.0, 20.0]], ("bb1", "bb2"))
        assert table.solvers == ("bb1", "bb2")
        assert np.array_equal(table.ratios, want.ratios)

    def test_cap_and_error_become_failures(self):
        cells = [
            make_cell(seed=0, policy="bb1", iterations=10),
            make_cell(seed=0, policy="bb2", iterations=500, solved=False,
                      status="cap"),
        ]
        table = profile_from_cells(cells)
        assert math.isinf(table.ratios[0, 1])


class TestProfileFromMatrixCsv:
    def test_tokens(self):
        text = "problem,a,b\np1,10,20\np2,5,fail\np3,4,--\np4,8,\n"
        table = profile_from_matrix_csv(text)
        assert table.solvers == ("a", "b")
        assert table.ratios[0, 1] == 2.0
        assert all(math.isinf(table.ratios[i, 1]) for i in (1, 2, 3))

    def test_comment_lines_skipped(self):
        text = "# produced elsewhere\nproblem,a,b\np1,10,20\n"
        assert profile_from_matrix_csv(text).ratios[0, 0] == 1.0

    def test_too_small_rejected(self):
        with pytest.raises(InvalidParameterError):
            profile_from_matrix_csv("problem,a\np1,10\n")
        with pytest.raises(InvalidParameterError):
            profile_from_matrix_csv("problem,a,b\n")
