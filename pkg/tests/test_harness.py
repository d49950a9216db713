import json
import math
import warnings

import numpy as np
import pytest

from rankwn.errors import InvalidAlpha, InvalidInput, NonStationaryWarning
from rankwn.harness import McCell, McGrid, McTable, replicate_key, run_power, run_size

SMALL = dict(n_list=[30], p_list=[4], K_list=[1], reps=100)


def test_grid_guards():
    with pytest.raises(InvalidInput):
        McGrid(models=["i"], methods=["rho"], reps=10)
    with pytest.raises(InvalidAlpha):
        McGrid(models=["i"], methods=["rho"], alpha=1.0)
    with pytest.raises(InvalidInput):
        McGrid(models=["i"], methods=["rho"], n_list=[20], K_list=[8])
    with pytest.raises(InvalidInput):
        McGrid(models=["x"], methods=["rho"])
    with pytest.raises(InvalidInput):
        McGrid(models=["i"], methods=["slr"])
    with pytest.raises(InvalidInput):
        McGrid(models=["i"], methods=["rho"], L_list=[1])
    with pytest.raises(InvalidInput):
        McGrid(models=["i"])


def test_mode_guards():
    with pytest.raises(InvalidInput):
        run_size(McGrid(models=["I"], methods=["rho"], **SMALL))
    with pytest.raises(InvalidInput):
        run_power(McGrid(models=["i"], methods=["rho"], **SMALL))


def test_replicate_keys_distinct():
    keys = {replicate_key(m, 100, 30, 2, None, None, r) for m in ("i", "ii") for r in range(50)}
    keys |= {replicate_key("I", 100, 30, 2, rho, 2, r) for rho in (0.1, 0.3) for r in range(50)}
    assert len(keys) == 200


def test_schedule_independence():
    grid = McGrid(
        models=["i", "vii"], methods=["rho", "d"], lstat_method="tau", L_list=[1, 3], B=100, base_seed=4, **SMALL
    )
    one = run_size(grid, workers=1)
    two = run_size(grid, workers=2)
    assert [(c.key, c.rejections, c.failures) for c in one.cells] == [
        (c.key, c.rejections, c.failures) for c in two.cells
    ]


def test_permutation_cells_at_alpha_half():
    grid = McGrid(models=["i"], lstat_method="rho", L_list=[1, 2], B=100, alpha=0.5, base_seed=1, **SMALL)
    table = run_size(grid)
    for cell in table.cells:
        assert abs(cell.rate - 0.5) < 4 * math.sqrt(0.25 / cell.reps) + 1 / 101


def test_mc_se_is_honest():
    common = dict(models=list("i ii iii iv v vi vii viii".split()), methods=["rho", "tau", "d", "r", "taustar", "xi"])
    common.update(n_list=[30], p_list=[5], K_list=[1], reps=200)
    a = run_size(McGrid(base_seed=101, **common))
    b = run_size(McGrid(base_seed=202, **common))
    ok = 0
    for ca, cb in zip(a.cells, b.cells):
        floor = 1 / ca.reps
        se = math.hypot(max(ca.mc_se, floor), max(cb.mc_se, floor))
        ok += abs(ca.rate - cb.rate) < 4 * se
    assert ok >= 0.95 * len(a.cells)


def test_power_grows_with_rho():
    grid = McGrid(
        models=["I"], methods=["taustar"], n_list=[100], p_list=[30], K_list=[2], reps=100, rho_list=[0.3, 0.9]
    )
    table = run_power(grid)
    lo = table.rate("I", "taustar", 100, 30, 2, 0.3, 2)
    hi = table.rate("I", "taustar", 100, 30, 2, 0.9, 2)
    assert hi >= lo


def test_diverging_replicates_are_counted():
    grid = McGrid(models=["I"], methods=["rho"], rho_list=[1000.0], k0_list=[4], **SMALL)
    cell = run_power(grid).cells[0]
    assert cell.failures == 100 and cell.partial and math.isnan(cell.rate)


def test_table_serialisation():
    grid = McGrid(models=["I"], methods=["rho", "xi"], rho_list=[0.2, 0.6], **SMALL)
    table = run_power(grid)
    assert len(table.cells) == 4
    back = McTable.from_dict(json.loads(table.to_json()))
    assert [c.key for c in back.cells] == [c.key for c in table.cells]
    assert back.cells[0].rate == table.cells[0].rate
    lines = table.to_csv().strip().splitlines()
    assert lines[0].startswith("model,method,n,p,K,rho,k0,rate") and len(lines) == 5
    with pytest.raises(KeyError):
        table.lookup("I", "rho", 30, 4, 1, 0.3, 2)


def test_cell_statistics():
    cell = McCell("i", "rho", 100, 30, 2, None, None, rejections=25, reps=500)
    assert cell.rate == 0.05 and cell.mc_se == pytest.approx(math.sqrt(0.05 * 0.95 / 500))
    assert not cell.partial
    assert McCell("i", "rho", 100, 30, 2, None, None, 0, 500, failures=6).partial
