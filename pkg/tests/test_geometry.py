from __future__ import annotations

import numpy as np
import pytest

from ris_ntn_sim.errors import DegenerateGeometry
from ris_ntn_sim.geometry import (SPEED_OF_LIGHT, ScenarioGeometry, UserPos2D,
                                  Vec3, delay_jacobian, distances, embed_user,
                                  path_delays)

SAT = Vec3(350000.0, 0.0, 600000.0)
RIS = Vec3(100.0, 0.0, 20.0)


def scenario(x, y, z0=1.5, sat=SAT, ris=RIS):
    return ScenarioGeometry(sat=sat, ris=ris, user=UserPos2D(x, y), z0=z0)


def oracle_distances(g):
    """Independent high-precision norm evaluation via float128 accumulation."""
    sat = np.array([g.sat.x, g.sat.y, g.sat.z], dtype=np.longdouble)
    ris = np.array([g.ris.x, g.ris.y, g.ris.z], dtype=np.longdouble)
    usr = np.array([g.user.x, g.user.y, g.z0], dtype=np.longdouble)
    norm = lambda v: float(np.sqrt(np.sum(v * v)))
    return norm(sat - usr), norm(sat - ris), norm(ris - usr)


class TestEmbedUser:
    def test_table_height(self):
        assert embed_user(UserPos2D(0.0, 0.0), 1.5) == Vec3(0.0, 0.0, 1.5)

    def test_zero_height_identity(self):
        assert embed_user(UserPos2D(3.0, -4.0), 0.0) == Vec3(3.0, -4.0, 0.0)

    def test_generic(self):
        assert embed_user(UserPos2D(40.0, 10.0), 1.5) == Vec3(40.0, 10.0, 1.5)


class TestDistances:
    def test_default_scenario_values(self):
        # frozen from the long-double oracle
        g = scenario(0.0, 0.0)
        d_su, d_sr, d_ru = distances(g)
        o_su, o_sr, o_ru = oracle_distances(g)
        assert d_su == pytest.approx(o_su, rel=1e-12)
        assert d_sr == pytest.approx(o_sr, rel=1e-12)
        assert d_su == pytest.approx(694620.9038045501, rel=1e-12)
        assert d_sr == pytest.approx(694554.5409829238, rel=1e-12)

    def test_ru_distance(self):
        g = scenario(40.0, 10.0)
        _, _, d_ru = distances(g)
        assert d_ru == pytest.approx(np.sqrt(4042.25), rel=1e-12)

    def test_unit_geometry(self):
        g = ScenarioGeometry(sat=Vec3(0, 0, 1), ris=Vec3(1, 0, 0.5),
                             user=UserPos2D(0, 0), z0=0.0)
        d_su, d_sr, d_ru = distances(g)
        assert d_su == pytest.approx(1.0)
        assert d_sr == pytest.approx(np.sqrt(1 + 0.25))
        assert d_ru == pytest.approx(np.sqrt(1 + 0.25))

    def test_degenerate_user_on_ris(self):
        with pytest.raises(DegenerateGeometry):
            distances(ScenarioGeometry(sat=Vec3(0, 0, 10), ris=Vec3(1, 2, 3),
                                       user=UserPos2D(1, 2), z0=3.0))

    def test_height_ordering_enforced(self):
        with pytest.raises(DegenerateGeometry):
            ScenarioGeometry(sat=Vec3(0, 0, 10), ris=Vec3(0, 1, 20),
                             user=UserPos2D(5, 5), z0=1.5)

    def test_nonfinite_rejected(self):
        with pytest.raises(DegenerateGeometry):
            ScenarioGeometry(sat=Vec3(np.nan, 0, 10), ris=Vec3(0, 1, 5),
                             user=UserPos2D(5, 5), z0=1.5)


class TestPathDelays:
    def test_direct_delay(self):
        g = scenario(0.0, 0.0)
        d_su, _, _ = distances(g)
        pd = path_delays(g)
        assert pd.tau_d == pytest.approx(d_su / 3e8, rel=1e-12)
        assert pd.tau_r == pytest.approx(pd.tau_sr + pd.tau_ru, rel=1e-15)

    def test_excess_delay_nonnegative_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(500):
            g = ScenarioGeometry(
                sat=Vec3(rng.uniform(-5e5, 5e5), rng.uniform(-5e5, 5e5),
                         rng.uniform(4e5, 8e5)),
                ris=Vec3(rng.uniform(-200, 200), rng.uniform(-200, 200),
                         rng.uniform(10, 50)),
                user=UserPos2D(rng.uniform(-100, 100), rng.uniform(-100, 100)),
                z0=rng.uniform(0, 3))
            assert path_delays(g).delta_tau_r >= 0.0

    def test_collinear_equality(self):
        # ris exactly on the sat-user segment: excess delay is zero
        sat = Vec3(0.0, 0.0, 1000.0)
        usr = UserPos2D(0.0, 0.0)
        z0 = 1.0
        ris = Vec3(0.0, 0.0, 500.5)
        g = ScenarioGeometry(sat=sat, ris=ris, user=usr, z0=z0)
        assert path_delays(g).delta_tau_r == pytest.approx(0.0, abs=1e-18)

    def test_unit_triangle(self):
        g = ScenarioGeometry(sat=Vec3(0, 0, 1), ris=Vec3(1, 0, 0.5),
                             user=UserPos2D(0, 0), z0=0.0)
        pd = path_delays(g)
        expected = (np.sqrt(1.25) * 2 - 1.0) / 3e8
        assert pd.delta_tau_r == pytest.approx(expected, rel=1e-12)


def fd_jacobian(g, step=1e-3, c=SPEED_OF_LIGHT):
    """Central finite differences of (tau_d, delta_tau_r) w.r.t. (x, y).

    Fully independent of the geometry module: delays are recomputed from
    long-double norms so cancellation noise stays below the FD signal.
    """
    sat = np.array([g.sat.x, g.sat.y, g.sat.z], dtype=np.longdouble)
    ris = np.array([g.ris.x, g.ris.y, g.ris.z], dtype=np.longdouble)

    def delays(x, y):
        usr = np.array([x, y, g.z0], dtype=np.longdouble)
        d_su = np.sqrt(np.sum((sat - usr) ** 2))
        d_sr = np.sqrt(np.sum((sat - ris) ** 2))
        d_ru = np.sqrt(np.sum((ris - usr) ** 2))
        return d_su / c, (d_sr + d_ru - d_su) / c

    out = np.zeros((2, 2))
    for j, (dx, dy) in enumerate([(step, 0.0), (0.0, step)]):
        tu = delays(g.user.x + dx, g.user.y + dy)
        tl = delays(g.user.x - dx, g.user.y - dy)
        out[0, j] = float((tu[0] - tl[0]) / (2 * step))
        out[1, j] = float((tu[1] - tl[1]) / (2 * step))
    return out


def frob_rel_err(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


class TestDelayJacobian:
    def test_matches_finite_differences(self):
        g = scenario(40.0, 10.0)
        assert frob_rel_err(delay_jacobian(g), fd_jacobian(g)) <= 1e-6

    def test_sat_overhead_zero_row(self):
        g = ScenarioGeometry(sat=Vec3(40.0, 10.0, 600000.0), ris=RIS,
                             user=UserPos2D(40.0, 10.0), z0=1.5)
        jac = delay_jacobian(g)
        assert np.allclose(jac[0], 0.0, atol=1e-18)

    def test_collinear_bearings_rank_one(self):
        # sat, ris and user share the ground-plane bearing: rows parallel
        g = scenario(40.0, 0.0)
        jac = delay_jacobian(g)
        det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
        assert det == pytest.approx(0.0, abs=1e-30)

    def test_row_norm_bound(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            g = scenario(rng.uniform(-80, 80), rng.uniform(-40, 40))
            jac = delay_jacobian(g)
            assert np.linalg.norm(jac[0]) <= 1.0 / 3e8 + 1e-15
            assert np.linalg.norm(jac[1]) <= 2.0 / 3e8 + 1e-15
