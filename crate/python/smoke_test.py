"""Smoke test for the leofreq Python extension.

Build first:  pip install --no-build-isolation ./crates/py
"""

import json
import math
import pathlib
import tempfile

import leofreq

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check_rf():
    assert abs(leofreq.linear_to_db(leofreq.db_to_linear(-12.2)) + 12.2) < 1e-12
    sat = leofreq.GainMask.preset("s1528-like", 35.0)
    gs = leofreq.GainMask.preset("s1428-like", 45.76)
    assert sat.gain_db(0.0) == 35.0
    assert gs.gain_db(10.0) < gs.gain_db(0.0)
    lam = 299_792_458.0 / 20e9
    i = leofreq.single_link_interference(1.0, 0.0, 0.0, 1e6, sat, gs, lam)
    fspl_db = 20 * math.log10(4 * math.pi * 1e6 / lam)
    assert abs(leofreq.linear_to_db(i) - (35.0 + 45.76 - fspl_db)) < 1e-9


def check_threshold():
    values = [0.01, 0.02, 0.03, 0.5]
    th, strong = leofreq.adaptive_threshold(values, leofreq.db_to_linear(-13.0), leofreq.db_to_linear(-12.2))
    assert strong == [3] and th == 0.5, (th, strong)


def check_coloring():
    # two gateways with three antennas each, plus cross-gateway interference
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (0, 3), (1, 4), (2, 5)]
    g = leofreq.Graph(6, edges)
    assert g.edge_count == 9
    for colors in (
        leofreq.random_coloring(g, 3, seed=1),
        leofreq.global_coloring(g, 3, seed=1),
        leofreq.generalized_global(g, 3, seed=1),
        leofreq.clique_tabu_search(g, [[0, 1, 2], [3, 4, 5]], 3, seed=1, n_initial=50),
    ):
        assert len(colors) == 6 and all(1 <= c <= 3 for c in colors)
    best = leofreq.clique_tabu_search(g, [[0, 1, 2], [3, 4, 5]], 3, seed=1)
    assert g.conflict_count(best) == 0

    sparse = leofreq.Graph(4, [(0, 1)], virtual_vertices=[3])
    base = [1, 2, 1, 0]
    reuse = leofreq.assign_vacant(sparse, base, 2)
    assert leofreq.reuse_is_valid(sparse, base, reuse)


def check_pipeline():
    scenario = leofreq.Scenario.load(str(ROOT / "configs" / "desk_europe.json"))
    cfg = json.loads(scenario.to_json())
    cfg["time_grid"]["num_slots"] = 3
    scenario = leofreq.Scenario.from_json(json.dumps(cfg))
    problem = scenario.prepare_slot(1)
    colors = leofreq.generalized_global(problem.graph, scenario.num_subchannels, seed=2)
    assert problem.link_failures(colors) <= sum(problem.is_real)

    with tempfile.TemporaryDirectory() as out:
        report = leofreq.simulate(scenario, "cts", tcfa=True, ps=0.05, vsu=True, seed=4, output_dir=out)
        assert (pathlib.Path(out) / "report.json").exists()
    again = leofreq.simulate(scenario, "cts", tcfa=True, ps=0.05, vsu=True, seed=4)
    assert report == again
    assert len(report["slots"]) == 3
    assert report["slots"][1]["edge_count"] == problem.graph.edge_count
    print(f"desk_europe, 3 slots: mean LF rate {report['mean_lf_rate']:.4f}, FSR {report['fsr']:.4f}")

    try:
        leofreq.simulate(scenario, "random", tcfa=True)
    except ValueError:
        pass
    else:
        raise AssertionError("tcfa with random should be rejected")


if __name__ == "__main__":
    check_rf()
    check_threshold()
    check_coloring()
    check_pipeline()
    print("smoke test passed")
