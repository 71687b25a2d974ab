import numpy as np
import pytest

import fracgraph as fg
from fracgraph.flow import StepStats, Trajectory


def run_flow(kernel, u0, **kwargs):
    cfg = fg.FlowConfig(**kwargs)
    return fg.evolve_direct(kernel, np.asarray(u0, dtype=float), cfg), cfg


class TestMass:
    def test_unit_constant(self, k2):
        assert fg.mass(k2, np.ones(2), 3.0) == 2.0

    def test_weighted(self):
        g = fg.Graph(
            mu=np.array([2.0, 3.0]), weights=np.array([[0.0, 1.0], [1.0, 0.0]])
        )
        # 2*1^2 + 3*2^2 = 14
        assert fg.mass(g, np.array([1.0, 2.0]), 2.0) == 14.0

    def test_rejects_nonpositive_for_fractional_q(self, k2):
        with pytest.raises(fg.NonPositiveState):
            fg.mass(k2, np.array([1.0, 0.0]), 0.5)

    def test_conserved_along_flow(self, k5_kernel):
        u0 = np.random.default_rng(0).uniform(0.5, 2.0, 5)
        traj, _ = run_flow(k5_kernel, u0, s=0.5, p=2.5, q=1.5, T=1.0)
        m0 = fg.mass(k5_kernel.graph, u0, 1.5)
        for u in traj.values:
            assert abs(fg.mass(k5_kernel.graph, u, 1.5) - m0) <= 1e-8 * m0


class TestEnergyIdentity:
    def test_constant_trajectory_zero_residual(self, k2_kernel):
        traj, _ = run_flow(k2_kernel, [1.3, 1.3], s=0.5, p=2.0, q=2.0, T=1.0)
        assert fg.energy_identity_residual(traj, k2_kernel, 2.0, 2.0) <= 1e-13

    def test_small_on_resolved_flow(self, k5_kernel):
        u0 = np.random.default_rng(1).uniform(0.5, 2.0, 5)
        traj, _ = run_flow(
            k5_kernel, u0, s=0.5, p=2.0, q=2.0, T=1.0, dt_out=1e-3
        )
        assert fg.energy_identity_residual(traj, k5_kernel, 2.0, 2.0) <= 1e-4

    def test_second_order_in_output_step(self, k5_kernel):
        # residual comes from the trapezoid rule, so halving dt_out should
        # shrink it by roughly four; require a log-log slope of at least 1.8
        u0 = np.random.default_rng(2).uniform(0.5, 2.0, 5)
        dts = np.array([4e-3, 2e-3, 1e-3])
        res = []
        for dt in dts:
            traj, _ = run_flow(
                k5_kernel, u0, s=0.5, p=2.0, q=2.0, T=1.0, dt_out=float(dt)
            )
            res.append(fg.energy_identity_residual(traj, k5_kernel, 2.0, 2.0))
        slope = np.polyfit(np.log(dts), np.log(res), 1)[0]
        assert slope >= 1.8


class TestDissipation:
    def test_constant_trajectory(self, k2_kernel):
        traj, _ = run_flow(k2_kernel, [2.0, 2.0], s=0.5, p=2.0, q=1.0, T=1.0)
        lhs, rhs, ok = fg.dissipation_check(traj, k2_kernel, 2.0, 1.0)
        assert lhs == 0.0
        assert rhs == 0.0
        assert ok

    def test_satisfied_on_resolved_flow(self, k5_kernel):
        u0 = np.random.default_rng(3).uniform(0.5, 2.0, 5)
        traj, _ = run_flow(
            k5_kernel, u0, s=0.5, p=2.0, q=1.0, T=5.0, dt_out=1e-3
        )
        lhs, rhs, ok = fg.dissipation_check(traj, k5_kernel, 2.0, 1.0)
        assert ok
        assert lhs >= 0.0
        assert rhs > 0.0

    def test_lhs_nondecreasing_in_horizon(self, k5_kernel):
        u0 = np.random.default_rng(4).uniform(0.5, 2.0, 5)
        lhss = []
        for T in (0.5, 1.0, 2.0):
            traj, _ = run_flow(
                k5_kernel, u0, s=0.5, p=2.0, q=1.0, T=T, dt_out=1e-3
            )
            lhss.append(fg.dissipation_check(traj, k5_kernel, 2.0, 1.0)[0])
        assert lhss[0] <= lhss[1] <= lhss[2]


class TestMaxPrinciple:
    def test_zero_for_flow(self, k5_kernel):
        u0 = np.random.default_rng(5).uniform(0.5, 2.0, 5)
        traj, _ = run_flow(k5_kernel, u0, s=0.5, p=2.5, q=1.5, T=2.0)
        assert fg.max_principle_check(traj) <= 1e-9

    def test_detects_excursion(self, k2_kernel):
        traj, _ = run_flow(k2_kernel, [1.0, 2.0], s=0.5, p=2.0, q=1.0, T=1.0)
        values = traj.values.copy()
        values[3, 0] = 2.5
        bad = Trajectory(times=traj.times, values=values, stats=traj.stats)
        assert fg.max_principle_check(bad) == pytest.approx(0.5)

    def test_explicit_reference_band(self):
        times = np.linspace(0.0, 1.0, 3)
        values = np.array([[1.0, 2.0], [1.5, 1.5], [1.2, 1.8]])
        traj = Trajectory(times=times, values=values, stats=StepStats(2, 0, 0.0))
        assert fg.max_principle_check(traj, u0=np.array([0.0, 3.0])) == 0.0
        assert fg.max_principle_check(traj, u0=np.array([1.1, 1.9])) == pytest.approx(
            0.1
        )


class TestGradientDecay:
    def test_nonincreasing_p2(self, k5_kernel):
        u0 = np.random.default_rng(6).uniform(0.5, 2.0, 5)
        traj, _ = run_flow(k5_kernel, u0, s=0.5, p=2.0, q=1.0, T=5.0)
        energies = fg.gradient_decay(traj, k5_kernel, 2.0)
        assert energies[-1] <= energies[0] * (1.0 + 1e-8) + 1e-12
        assert energies[-1] <= 1e-4 * energies[0]

    def test_final_derivative_small_after_decay(self, k2_kernel):
        traj, _ = run_flow(k2_kernel, [1.5, 0.5], s=0.5, p=2.0, q=1.0, T=30.0)
        assert fg.time_derivative_sup(traj, k2_kernel, 2.0, 1.0) <= 1e-9


class TestBuildReport:
    def test_full_report_on_flow(self, k5_kernel):
        u0 = np.random.default_rng(7).uniform(0.5, 2.0, 5)
        traj, cfg = run_flow(k5_kernel, u0, s=0.5, p=2.0, q=2.0, T=30.0)
        report = fg.build_report(traj, k5_kernel, cfg)
        assert report.dissipation_satisfied
        assert report.bound_violation <= 1e-9
        assert report.mass_drift <= 1e-8 * fg.mass(k5_kernel.graph, u0, 2.0)
        assert report.final_gradient_energy <= report.initial_gradient_energy
        assert report.steady_state_error <= 1e-5
        assert report.energy_identity_residual <= 1e-2

    def test_json_round_trip_with_extras(self, k2_kernel):
        import json

        traj, cfg = run_flow(k2_kernel, [1.0, 2.0], s=0.5, p=2.0, q=1.0, T=1.0)
        report = fg.build_report(traj, k2_kernel, cfg)
        doc = json.loads(report.to_json(seed=7))
        assert doc["seed"] == 7
        assert doc["dissipation_satisfied"] is True
        assert set(doc) >= {
            "energy_identity_residual",
            "mass_drift",
            "bound_violation",
            "steady_state_error",
        }
