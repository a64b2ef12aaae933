import numpy as np
import pytest

from slipmeter.errors import ParameterError, ParseError
from slipmeter.ingest import align, body_velocity_from_poses
from slipmeter.kinematics import VehicleSpec, WheelCommand, ideal_diff_drive
from slipmeter.metrics import distortion_series, summarize
from slipmeter.sim import (
    IDENTITY_SLIP,
    SlipModel,
    apply_slip,
    generate_commands,
    load_scenario,
    run_scenario,
)

SIMBOT = VehicleSpec("simbot", mass=100.0, v_max=1.0, wheel_radius=0.3, track_width=1.2)


def forward_speeds(commands, spec):
    return np.array([ideal_diff_drive(c, spec).vx for c in commands])


def pipeline_median(commands, spec, model, grid_dt, seed=0):
    velocities, _ = apply_slip(commands, spec, model, seed=seed)
    ds = align(commands, velocities, grid_dt=grid_dt, max_gap=4 * grid_dt, vehicle=spec)
    return summarize(distortion_series(ds)).median


class TestGenerateCommands:
    def test_ramp_sample_count_and_monotonicity(self):
        commands = generate_commands("ramp", 10.0, 0.05, SIMBOT)
        assert len(commands) == 200
        fx = forward_speeds(commands, SIMBOT)
        assert np.all(np.diff(np.abs(fx)) >= 0.0)

    def test_step_has_single_discontinuity(self):
        commands = generate_commands("step", 10.0, 0.05, SIMBOT, step_time=5.0)
        wl = np.array([c.omega_l for c in commands])
        jumps = np.flatnonzero(np.abs(np.diff(wl)) > 1e-12)
        assert jumps.size == 1
        assert commands[jumps[0] + 1].t == pytest.approx(5.0)

    def test_same_seed_is_identical(self):
        a = generate_commands("random_walk", 5.0, 0.05, SIMBOT, seed=99)
        b = generate_commands("random_walk", 5.0, 0.05, SIMBOT, seed=99)
        assert a == b

    def test_different_seed_differs(self):
        a = generate_commands("random_walk", 5.0, 0.05, SIMBOT, seed=1)
        b = generate_commands("random_walk", 5.0, 0.05, SIMBOT, seed=2)
        assert a != b

    @pytest.mark.parametrize("profile", ["ramp", "step", "sine", "random_walk", "mixed"])
    def test_speed_bound_holds(self, profile):
        commands = generate_commands(profile, 20.0, 0.05, SIMBOT, seed=5)
        fx = forward_speeds(commands, SIMBOT)
        assert np.all(np.abs(fx) <= SIMBOT.v_max + 1e-9)

    def test_invalid_profile(self):
        with pytest.raises(ParameterError):
            generate_commands("zigzag", 10.0, 0.05, SIMBOT)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            generate_commands("ramp", 0.0, 0.05, SIMBOT)
        with pytest.raises(ParameterError):
            generate_commands("step", 10.0, 0.05, SIMBOT, step_time=10.0)
        with pytest.raises(ParameterError):
            generate_commands("ramp", 10.0, 0.05, VehicleSpec("bare", mass=1.0, v_max=1.0))


class TestApplySlip:
    def test_identity_model_reproduces_ideal(self):
        commands = generate_commands("sine", 20.0, 0.05, SIMBOT)
        velocities, _ = apply_slip(commands, SIMBOT, IDENTITY_SLIP)
        for c, (t, v) in zip(commands, velocities):
            f = ideal_diff_drive(c, SIMBOT)
            assert t == c.t
            assert v.vx == pytest.approx(f.vx, abs=1e-15)
            assert v.vy == 0.0
            assert v.omega == pytest.approx(f.omega, abs=1e-15)

    def test_identity_pipeline_median_is_zero(self):
        commands = generate_commands("mixed", 30.0, 0.05, SIMBOT, seed=3)
        assert pipeline_median(commands, SIMBOT, IDENTITY_SLIP, 0.05) < 1e-9

    def test_longitudinal_slip_steady_state(self):
        commands = generate_commands("step", 10.0, 0.05, SIMBOT, step_time=0.0)
        model = SlipModel(lon_slip=0.2)
        velocities, _ = apply_slip(commands, SIMBOT, model)
        vx = np.array([v.vx for _, v in velocities])
        fx = forward_speeds(commands, SIMBOT)
        np.testing.assert_allclose(vx, 0.8 * fx, atol=1e-12)
        assert pipeline_median(commands, SIMBOT, model, 0.05) == pytest.approx(0.2, abs=1e-9)

    def test_first_order_lag_step_response(self):
        # tau=1 s and a step to f_x=1 at t=0: modulus follows exp(-t).
        dt, tau = 0.002, 1.0
        commands = generate_commands("step", 6.0, dt, SIMBOT, step_time=0.0)
        model = SlipModel(tau=tau)
        velocities, _ = apply_slip(commands, SIMBOT, model)
        t = np.array([tv for tv, _ in velocities])
        vx = np.array([v.vx for _, v in velocities])
        np.testing.assert_allclose(vx, 1.0 - np.exp(-t / tau), atol=1e-3)

    def test_lag_modulus_matches_exponential_through_pipeline(self):
        dt, tau = 0.002, 1.0
        commands = generate_commands("step", 6.0, dt, SIMBOT, step_time=0.0)
        velocities, _ = apply_slip(commands, SIMBOT, SlipModel(tau=tau))
        ds = align(commands, velocities, grid_dt=dt, max_gap=4 * dt, vehicle=SIMBOT)
        series = distortion_series(ds)
        np.testing.assert_allclose(series.modulus, np.exp(-series.t / tau), atol=1e-3)

    def test_noise_is_seed_deterministic(self):
        commands = generate_commands("ramp", 5.0, 0.05, SIMBOT)
        model = SlipModel(noise_sigma=0.05)
        v1, p1 = apply_slip(commands, SIMBOT, model, seed=7)
        v2, p2 = apply_slip(commands, SIMBOT, model, seed=7)
        v3, _ = apply_slip(commands, SIMBOT, model, seed=8)
        assert v1 == v2 and p1 == p2
        assert v1 != v3

    def test_lateral_coupling_scaled_by_track_width(self):
        commands = [WheelCommand(t, -2.0, 2.0) for t in np.arange(0.0, 2.0, 0.05)]
        model = SlipModel(lat_coupling=0.1)
        velocities, _ = apply_slip(commands, SIMBOT, model)
        fomega = ideal_diff_drive(commands[0], SIMBOT).omega
        expected_vy = 0.1 * SIMBOT.track_width * fomega
        assert velocities[5][1].vy == pytest.approx(expected_vy, abs=1e-12)

    def test_model_validation(self):
        with pytest.raises(ParameterError):
            SlipModel(lon_slip=1.0)
        with pytest.raises(ParameterError):
            SlipModel(ang_scale=0.0)
        with pytest.raises(ParameterError):
            SlipModel(tau=-0.5)
        with pytest.raises(ParameterError):
            SlipModel(noise_sigma=-1.0)


class TestMedianMonotonicity:
    def test_median_strictly_increases_with_slip(self):
        commands = generate_commands("step", 10.0, 0.05, SIMBOT, step_time=0.0)
        medians = [
            pipeline_median(commands, SIMBOT, SlipModel(lon_slip=s), 0.05)
            for s in (0.05, 0.1, 0.2, 0.4)
        ]
        assert all(b > a for a, b in zip(medians, medians[1:]))
        np.testing.assert_allclose(medians, [0.05, 0.1, 0.2, 0.4], atol=1e-9)


class TestTransitoryBlindness:
    def test_equal_steady_state_slip_hides_lag_on_steady_runs(self):
        # Same steady-state slip, tau of 0 vs 2 s: on a long constant-speed
        # run the medians agree within 15 %, so the modulus cannot tell the
        # sluggish vehicle from the instant one.
        commands = generate_commands("step", 120.0, 0.05, SIMBOT, step_time=0.0)
        m_instant = pipeline_median(commands, SIMBOT, SlipModel(lon_slip=0.2, tau=0.0), 0.05)
        m_lagged = pipeline_median(commands, SIMBOT, SlipModel(lon_slip=0.2, tau=2.0), 0.05)
        assert abs(m_lagged - m_instant) / m_instant < 0.15

    def test_step_heavy_profile_separates_the_same_models(self):
        # A square wave never lets the lagged vehicle settle, so the same two
        # models now differ by far more than 50 %.
        dt, period = 0.05, 8.0
        t = np.arange(0.0, 120.0, dt)
        on = ((t % period) < period / 2).astype(float)
        omega_max = SIMBOT.v_max / SIMBOT.wheel_radius
        commands = [WheelCommand(ti, oi * omega_max, oi * omega_max) for ti, oi in zip(t, on)]
        m_instant = pipeline_median(commands, SIMBOT, SlipModel(lon_slip=0.2, tau=0.0), dt)
        m_lagged = pipeline_median(commands, SIMBOT, SlipModel(lon_slip=0.2, tau=2.0), dt)
        assert abs(m_lagged - m_instant) / m_instant > 0.5


class TestPoseIntegrationConsistency:
    def test_pose_differentiation_recovers_generating_velocities(self):
        # Close the loop with ingest at 100 Hz on a smooth curving run.
        commands = generate_commands("sine", 20.0, 0.01, SIMBOT)
        velocities, poses = apply_slip(commands, SIMBOT, IDENTITY_SLIP)
        recovered = body_velocity_from_poses(poses)
        for (t_gen, v_gen), (t_rec, v_rec) in list(zip(velocities, recovered))[1:-1]:
            assert t_gen == t_rec
            assert v_rec.vx == pytest.approx(v_gen.vx, abs=1e-3)
            assert v_rec.vy == pytest.approx(v_gen.vy, abs=1e-3)
            assert v_rec.omega == pytest.approx(v_gen.omega, abs=1e-3)


class TestScenario:
    def test_load_and_run(self, tmp_path):
        config = tmp_path / "scenario.toml"
        config.write_text(
            'name = "demo"\nprofile = "step"\nduration = 5.0\ndt = 0.05\n'
            "step_time = 0.0\nlon_slip = 0.2\nseed = 4\n",
            encoding="utf-8",
        )
        scenario = load_scenario(config)
        assert scenario.name == "demo"
        assert scenario.slip.lon_slip == 0.2
        out = run_scenario(scenario, tmp_path / "out")
        for filename in ("dataset.toml", "commands.csv", "velocities.csv", "poses.csv"):
            assert (out / filename).exists()

    def test_unknown_key_rejected(self, tmp_path):
        config = tmp_path / "scenario.toml"
        config.write_text("profile = \"ramp\"\nslip = 0.2\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_scenario(config)
        assert "slip" in str(err.value)

    def test_runs_are_byte_identical_for_same_seed(self, tmp_path):
        config = tmp_path / "scenario.toml"
        config.write_text('profile = "random_walk"\nduration = 4.0\nnoise_sigma = 0.02\n', encoding="utf-8")
        scenario = load_scenario(config)
        d1 = run_scenario(scenario, tmp_path / "r1")
        d2 = run_scenario(scenario, tmp_path / "r2")
        for filename in ("dataset.toml", "commands.csv", "velocities.csv", "poses.csv"):
            assert (d1 / filename).read_bytes() == (d2 / filename).read_bytes()
