""" Tests of instance generation, scenario runs and CSV output """


# global imports
import json
import logging
import dataclasses
import numpy as np
import pytest

# local imports
from src.backend.harness import (CSV_COLUMNS, CSV_SCHEMA, PLOT_COLUMNS, ResultRow, ScenarioConfig, emit_plot_data,
                                 generate_instance, run_scenario, write_csv, write_link_summary, write_plot_data)
from src.backend.model import MBIT, Allocation, total_energy
from src.backend.optimizer import RunConfig, alternate, local_baseline
from src.errors.errors import ValidationError


SMALL = ScenarioConfig(num_nodes=4, antennas=2, subchannels=2, seeds=(0, 1), restarts=2, alternations=3,
                       methods=("exact", "greedy", "random", "local"))


def by_method(rows):
    return {(row.seed, row.method): row for row in rows}


def test_generated_parameters_lie_in_ranges():
    cfg = ScenarioConfig(num_nodes=10, antennas=3)
    net, ch = generate_instance(cfg, 3)
    assert net.num_nodes == 10
    for node in net.nodes:
        assert 1 * MBIT <= node.data_length <= 20 * MBIT
        assert 0.1 * MBIT <= node.compute_speed <= 2 * MBIT
        assert 0.5 <= node.compute_power <= 1.0
        assert node.tx_antennas == node.rx_antennas == 3
    assert len(ch) == 90
    assert all(ch[pair].shape == (3, 3) for pair in ch)
    ch.validate(net)


def test_generation_is_deterministic():
    cfg = ScenarioConfig(num_nodes=5, antennas=2)
    first_net, first_ch = generate_instance(cfg, 11)
    second_net, second_ch = generate_instance(cfg, 11)
    assert first_net == second_net
    for pair in first_ch:
        np.testing.assert_array_equal(first_ch[pair], second_ch[pair])


def test_seeds_give_different_instances():
    cfg = ScenarioConfig(num_nodes=5, antennas=2)
    first, _ = generate_instance(cfg, 1)
    second, _ = generate_instance(cfg, 2)
    assert not np.array_equal(first.data_lengths, second.data_lengths)


def test_pair_channels_do_not_depend_on_network_size():
    _, small = generate_instance(ScenarioConfig(num_nodes=4, antennas=2), 5)
    _, large = generate_instance(ScenarioConfig(num_nodes=8, antennas=2), 5)
    for pair in small:
        np.testing.assert_array_equal(small[pair], large[pair])


def test_smallest_instance():
    net, ch = generate_instance(ScenarioConfig(num_nodes=2, antennas=1), 0)
    assert set(ch) == {(0, 1), (1, 0)}
    assert ch[(0, 1)].shape == (1, 1)
    assert net.max_links == 1


def test_channels_have_unit_variance():
    _, ch = generate_instance(ScenarioConfig(num_nodes=10, antennas=6), 0)
    entries = np.concatenate([ch[pair].ravel() for pair in ch])
    assert np.mean(np.abs(entries) ** 2) == pytest.approx(1.0, abs=0.1)
    assert abs(np.mean(entries)) < 0.1


def test_single_scenario_rows():
    rows = run_scenario(SMALL)
    assert len(rows) == 8
    assert [(row.seed, row.method) for row in rows] == [(s, m) for s in (0, 1) for m in SMALL.methods]
    assert all(row.ok for row in rows)

    table = by_method(rows)
    for seed in SMALL.seeds:
        net, _ = generate_instance(SMALL, seed)
        local = table[(seed, "local")]
        assert local.energy_total == pytest.approx(local_baseline(net).total)
        assert local.num_links == 0
        for method in ("exact", "greedy"):
            row = table[(seed, method)]
            assert row.energy_total <= local.energy_total
            assert row.energy_total == pytest.approx(row.energy_communication + row.energy_computation)
            assert 0 <= row.num_links <= 2
        assert all(row.wall_ms == 0.0 for row in rows)


def test_csv_is_reproducible(tmp_path):
    paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
    for path in paths:
        write_csv(run_scenario(SMALL), str(path), SMALL)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_csv_layout(tmp_path):
    path = tmp_path / "nested" / "out.csv"
    write_csv(run_scenario(dataclasses.replace(SMALL, seeds=(0,))), str(path), SMALL)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == f"# schema={CSV_SCHEMA} config_hash={SMALL.config_hash()}"
    assert lines[1].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 2 + 4
    assert lines[2].split(",")[-1] == "ok"


def test_empty_seed_list_writes_header_only(tmp_path):
    cfg = dataclasses.replace(SMALL, seeds=())
    rows = run_scenario(cfg)
    path = tmp_path / "empty.csv"
    write_csv(rows, str(path), cfg)
    assert rows == []
    assert len(path.read_text(encoding="utf-8").splitlines()) == 2


def test_exact_above_size_limit_gives_error_row():
    cfg = ScenarioConfig(scenario="nodes_sweep", antennas=6, subchannels=1, seeds=(0,), methods=("exact", "local"),
                         sweep_values=(10,), restarts=1, alternations=2)
    rows = run_scenario(cfg)
    assert [row.method for row in rows] == ["exact", "local"]
    assert rows[0].status == "error:ProblemSizeError"
    assert rows[0].energy_total is None
    assert rows[1].ok
    assert rows[1].sweep_var == "num_nodes" and rows[1].sweep_value == 10


def test_error_row_formatting():
    row = ResultRow(scenario="single", seed=3, method="exact", sweep_var="none", sweep_value=0,
                    status="error:ProblemSizeError")
    assert row.as_csv_row() == ["single", "3", "exact", "none", "0", "", "", "", "0", "0", "0.0",
                                "error:ProblemSizeError"]


def test_energies_are_written_with_full_precision():
    row = ResultRow(scenario="single", seed=0, method="local", sweep_var="none", sweep_value=0,
                    energy_total=0.1 + 0.2, energy_communication=0.0, energy_computation=0.1 + 0.2)
    assert float(row.as_csv_row()[5]) == 0.1 + 0.2


def test_iterations_scenario_emits_trajectory():
    cfg = dataclasses.replace(SMALL, scenario="iterations", seeds=(0,), methods=("greedy", "local"),
                              sweep_values=(2,))
    rows = run_scenario(cfg)
    greedy = [row for row in rows if row.method == "greedy"]
    local = [row for row in rows if row.method == "local"]
    assert [row.alternations for row in greedy] == list(range(len(greedy)))
    assert 2 <= len(greedy) <= cfg.alternations + 1
    assert len(local) == 1
    assert all(row.sweep_var == "antennas" and row.sweep_value == 2 for row in rows)


def test_links_sweep_with_zero_cap_is_local():
    cfg = dataclasses.replace(SMALL, scenario="links_sweep", seeds=(0,), methods=("greedy", "random", "local"))
    rows = run_scenario(cfg)
    assert sorted({row.sweep_value for row in rows}) == [0, 1, 2]
    at_zero = {row.method: row for row in rows if row.sweep_value == 0}
    local = at_zero["local"].energy_total
    assert at_zero["greedy"].energy_total == pytest.approx(local)
    assert at_zero["greedy"].num_links == 0
    assert at_zero["random"].num_links == 0
    for row in rows:
        assert row.num_links <= row.sweep_value


def test_subchannels_sweep_uses_default_points():
    cfg = dataclasses.replace(SMALL, scenario="subchannels_sweep", seeds=(0,), methods=("local",))
    rows = run_scenario(cfg)
    assert [(row.sweep_var, row.sweep_value) for row in rows] == [("subchannels", s) for s in (1, 2, 3)]


def test_emit_plot_data_aggregates():
    common = dict(scenario="single", sweep_var="none", sweep_value=0)
    rows = [
        ResultRow(seed=0, method="greedy", energy_total=3.0, energy_communication=1.0, energy_computation=2.0,
                  **common),
        ResultRow(seed=1, method="greedy", energy_total=5.0, energy_communication=1.0, energy_computation=4.0,
                  **common),
        ResultRow(seed=2, method="greedy", status="error:InfeasibleLinkError", **common),
        ResultRow(seed=0, method="local", energy_total=6.0, energy_communication=0.0, energy_computation=6.0,
                  **common),
    ]
    points = emit_plot_data(rows)
    assert [p.method for p in points] == ["greedy", "local"]
    greedy, local = points
    assert greedy.count == 2
    assert greedy.step == -1
    assert greedy.mean_total == pytest.approx(4.0)
    assert greedy.best_total == 3.0
    assert greedy.mean_computation == pytest.approx(3.0)
    assert local.mean_total == local.best_total == 6.0


def test_plot_data_of_single_run_equals_row(tmp_path):
    rows = run_scenario(dataclasses.replace(SMALL, seeds=(0,), methods=("greedy",)))
    (point,) = emit_plot_data(rows)
    assert point.mean_total == point.best_total == rows[0].energy_total

    path = tmp_path / "plot.csv"
    write_plot_data([point], str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == list(PLOT_COLUMNS)
    assert len(lines) == 2


def test_plot_data_splits_iterations_by_step():
    common = dict(scenario="iterations", method="greedy", sweep_var="antennas", sweep_value=2)
    rows = [ResultRow(seed=s, energy_total=float(10 - t), energy_communication=0.0,
                      energy_computation=float(10 - t), alternations=t, **common)
            for s in (0, 1) for t in range(3)]
    points = emit_plot_data(rows)
    assert [p.step for p in points] == [0, 1, 2]
    assert [p.count for p in points] == [2, 2, 2]
    assert [p.mean_total for p in points] == [10.0, 9.0, 8.0]


def test_strict_properness_rejects_improper_point():
    cfg = ScenarioConfig(num_nodes=12, antennas=1, seeds=(0,), methods=("local",), strict_properness=True)
    with pytest.raises(ValidationError):
        run_scenario(cfg)


def test_improper_point_only_warns(caplog):
    cfg = ScenarioConfig(num_nodes=12, antennas=1, seeds=(0,), methods=("local",))
    with caplog.at_level(logging.WARNING):
        rows = run_scenario(cfg)
    assert rows[0].ok
    assert "isn't proper" in caplog.text


def test_config_hash():
    base = ScenarioConfig()
    assert base.config_hash() == ScenarioConfig().config_hash()
    assert base.config_hash() == dataclasses.replace(base, output_path="elsewhere.csv", workers=4).config_hash()
    assert base.config_hash() != dataclasses.replace(base, seeds=(1,)).config_hash()
    assert base.config_hash() != dataclasses.replace(base, power_budget=10.0).config_hash()


@pytest.mark.parametrize("kwargs", [
    dict(scenario="unknown"), dict(methods=("greedy", "best")), dict(num_nodes=0), dict(power_budget=0.0),
    dict(compute_speed_range=(2.0, 1.0)), dict(seeds=(-1,)), dict(workers=0),
])
def test_invalid_scenario_config(kwargs):
    with pytest.raises(ValidationError):
        ScenarioConfig(**kwargs)


def test_workers_do_not_change_rows():
    cfg = dataclasses.replace(SMALL, methods=("greedy", "random", "local"))
    assert run_scenario(dataclasses.replace(cfg, workers=2)) == run_scenario(cfg)


def test_rows_carry_the_allocation_behind_their_energy():
    rows = run_scenario(SMALL)
    assert all(row.has_summary for row in rows)
    for row in rows:
        net, _ = generate_instance(SMALL, row.seed)
        alloc = Allocation(row.links)
        alloc.validate(net)
        assert alloc.num_links == row.num_links
        energy = total_energy(net, alloc, row.rates, row.powers)
        assert energy.total == pytest.approx(row.energy_total, rel=1e-12)
        assert sum(row.powers) <= net.power_budget * (1 + 1e-9)


def test_link_summary_file_revalidates(tmp_path):
    rows = run_scenario(SMALL)
    path = tmp_path / "nested" / "links.json"
    assert write_link_summary(rows, str(path)) == len(rows)
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["schema"] == CSV_SCHEMA
    assert [(entry["seed"], entry["method"]) for entry in data["rows"]] == [(row.seed, row.method) for row in rows]
    for entry, row in zip(data["rows"], rows):
        net, _ = generate_instance(SMALL, entry["seed"])
        alloc = Allocation(tuple(tuple(link) for link in entry["links"]))
        energy = total_energy(net, alloc, entry["rates_bps"], entry["powers_w"])
        assert energy.total == pytest.approx(entry["E_P_joules"], rel=1e-12)
        assert entry["E_P_joules"] == row.energy_total


def test_error_and_trajectory_rows_have_no_summary(tmp_path):
    cfg = dataclasses.replace(SMALL, scenario="iterations", seeds=(0,), methods=("greedy",), sweep_values=(2,))
    rows = run_scenario(cfg)
    assert rows and not any(row.has_summary for row in rows)
    error = ResultRow(scenario="single", seed=0, method="exact", sweep_var="none", sweep_value=0,
                      status="error:ProblemSizeError")
    assert write_link_summary([error], str(tmp_path / "links.json")) == 0


def test_mean_report_gives_mean_over_restarts():
    cfg = dataclasses.replace(SMALL, num_nodes=6, antennas=2, restarts=4, seeds=(0, 1, 2), methods=("greedy",))
    best_rows = run_scenario(cfg)
    mean_rows = run_scenario(dataclasses.replace(cfg, report="mean"))
    assert [(row.seed, row.method) for row in mean_rows] == [(row.seed, row.method) for row in best_rows]

    for best, mean in zip(best_rows, mean_rows):
        net, ch = generate_instance(cfg, mean.seed)
        report = alternate(net, ch, RunConfig(num_restarts=cfg.restarts, alternations=cfg.alternations,
                                              allocator="greedy", rng_seed=mean.seed, wmmse=cfg.wmmse))
        assert best.energy_total == pytest.approx(report.best.energy.total, rel=1e-12)
        assert mean.energy_total == pytest.approx(report.mean_energy.total, rel=1e-12)
        assert mean.energy_total >= best.energy_total * (1 - 1e-12)
        assert not mean.has_summary
    assert any(mean.energy_total > best.energy_total for best, mean in zip(best_rows, mean_rows))


def test_mean_report_of_random_baseline():
    cfg = dataclasses.replace(SMALL, restarts=3, seeds=(0,), methods=("random",))
    best = run_scenario(cfg)[0]
    mean = run_scenario(dataclasses.replace(cfg, report="mean"))[0]
    assert mean.energy_total >= best.energy_total * (1 - 1e-12)
    assert mean.energy_total == pytest.approx(mean.energy_communication + mean.energy_computation)


def test_mean_report_changes_config_hash():
    assert SMALL.config_hash() != dataclasses.replace(SMALL, report="mean").config_hash()


@pytest.mark.parametrize("kwargs", [
    dict(report="worst"),
    dict(scenario="subchannels_sweep", sweep_values=(0, 1)),
    dict(scenario="iterations", sweep_values=(0,)),
    dict(scenario="nodes_sweep", sweep_values=(1, 4)),
    dict(scenario="links_sweep", sweep_values=(-1,)),
])
def test_config_rejects_unusable_values(kwargs):
    with pytest.raises(ValidationError):
        ScenarioConfig(**kwargs)


def test_links_sweep_accepts_zero_cap():
    assert ScenarioConfig(scenario="links_sweep", sweep_values=(0, 1)).sweep_values == (0, 1)
