import math
from fractions import Fraction as Fr

import pytest

from wavefront.diagnostics import adapted_entropy_report
from wavefront.errors import ConvexityFloorViolated, GeometryViolated
from wavefront.scenarios import (RandomParams, build_counterexample1, cex2_flux_second_derivative,
                                 cex2_flux_value, counterexample2_setup, pl_cex1_quantities,
                                 predict_counterexample1, predict_counterexample2,
                                 random_scenario)
from wavefront.tracker import init_state, run


def test_cex1_first_block():
    blocks, bound = predict_counterexample1(1, 0.2)
    b = blocks[0]
    assert b.a == 1 and b.x2 - b.x1 == pytest.approx(16)
    assert b.lam == pytest.approx(3)
    assert b.b == pytest.approx(3 ** 0.25, rel=1e-12)
    assert b.xi == pytest.approx(3 ** 0.75, rel=1e-12)
    assert b.b == pytest.approx(1.31607, abs=1e-5) and b.xi == pytest.approx(2.27951, abs=1e-5)
    assert bound == 1


def test_cex1_bad_parameters():
    with pytest.raises(GeometryViolated):
        predict_counterexample1(0)
    with pytest.raises(GeometryViolated):
        predict_counterexample1(3, 0.3)


def test_cex1_prediction_formulas():
    blocks, bound = predict_counterexample1(30, 0.2)
    for b in blocks:
        n = b.n
        assert b.a == pytest.approx(n ** -1.2)
        assert b.lam == pytest.approx(2 * b.a / n ** 1.5 + b.a ** 3)
        assert b.b ** 4 == pytest.approx(2 * b.a ** 2 / n ** 1.5 + b.a ** 4)
        assert b.xi == pytest.approx(b.b ** 3)
        assert b.b >= n ** -(0.875 + 0.1)
        assert b.y_prev < b.x1 < b.x2 <= b.z < b.y
        assert b.z - b.x1 >= 4 * b.a / n ** 1.5 + 4 * b.a ** 3     # f_n'(a_n), horizon 1
        assert b.xi * (1 - b.t_hit) + b.z < b.y
    assert bound == pytest.approx(sum(k ** -0.975 for k in range(1, 31)))


def test_cex1_single_block_run():
    fld, data = build_counterexample1(1, 0.2, 64)
    assert set(data.values) == {0.0, 1.0}
    blk = predict_counterexample1(1, 0.2)[0][0]
    q = pl_cex1_quantities(fld, blk)
    assert fld.on_grid(q["b_pl"])
    tr = run(init_state(fld, data), 1.0)
    u = tr.sample(1.0)
    assert u(blk.z) == pytest.approx(q["b_pl"], rel=1e-12)
    assert u.left_limit(blk.z) == pytest.approx(blk.a, rel=1e-12)
    assert abs(q["b_pl"] - blk.b) / blk.b < 5e-3
    assert adapted_entropy_report(fld, tr).passed


def test_cex1_hit_times():
    N = 6
    fld, data = build_counterexample1(N, 0.2, 64)
    blocks, _ = predict_counterexample1(N, 0.2)
    tr = run(init_state(fld, data), 1.0)
    hits = {}
    for e in tr.events:
        if e.interface is not None and e.interface % 2 == 0:
            hits.setdefault(e.interface // 2 + 1, e.t)
    for b in blocks[1:]:
        assert hits[b.n] == pytest.approx(b.t_hit, rel=1e-6)


def test_cex1_b_pl_refines():
    blk = predict_counterexample1(4, 0.2)[0][3]
    errs = []
    for K in (8, 32, 128):
        fld, _ = build_counterexample1(4, 0.2, K)
        errs.append(abs(pl_cex1_quantities(fld, blk)["b_pl"] - blk.b))
    assert errs[0] >= errs[1] >= errs[2]


def test_cex2_seamless_join():
    for n in (3, 4, 9):
        r = n ** (-2 / 3)
        assert cex2_flux_value(n, r) == pytest.approx(n ** (-4 / 3), rel=1e-12)
        assert cex2_flux_value(n, -r) == pytest.approx(r * r, rel=1e-12)
        assert cex2_flux_second_derivative(n, r * 1.0001) == 2


def test_cex2_cells():
    s = counterexample2_setup(5, grid_refine=16, n0=4)
    a, b, k = s.cells[4]
    assert float(a) == pytest.approx(0.39685, abs=1e-5)
    assert b - a == Fr(1, 4 ** 8)
    assert s.field.interfaces == tuple(sorted(s.field.interfaces))


def test_cex2_n_equals_n0():
    s = counterexample2_setup(4, grid_refine=16, n0=4)
    assert len(s.cells) == 1 and s.field.n_cells == 3
    with pytest.raises(ConvexityFloorViolated):
        counterexample2_setup(3, grid_refine=16, n0=4)


def test_cex2_predictions():
    assert predict_counterexample2(7)["w_N"] == pytest.approx(0.25)
    for r in predict_counterexample2(17)["rows"]:
        assert r["J"] * r["m"] ** (11 / 12) == pytest.approx(1 / 54)
    # the floors are not summable: partial sums keep growing like M^{1/12}
    sums = [sum(m ** (-11 / 12) for m in range(1, M + 1)) for M in (10, 100, 1000)]
    assert sums[2] - sums[1] > sums[1] - sums[0] > 0


def test_random_scenario_contract():
    a = random_scenario(11, 0, 5)
    b = random_scenario(11, 0, 5)
    assert a[0].to_json() == b[0].to_json() and a[1] == b[1]
    assert a[0].n_cells == 1
    fld, data = random_scenario(11, 3, 5)
    assert fld.n_cells == 4
    assert all(fld.on_grid(v) for v in data.values)


@pytest.mark.parametrize("params", [RandomParams(), RandomParams(quadratic=True),
                                    RandomParams(compact=True), RandomParams(snap=1 / 16)])
def test_random_runs_are_admissible(params):
    for seed in range(15):
        fld, data = random_scenario(seed, 3, 10, params)
        tr = run(init_state(fld, data), 2)
        assert adapted_entropy_report(fld, tr).passed
