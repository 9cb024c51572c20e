"""Frame compilation: angle extraction, hardware schedule synthesis, export
validation, and the dual-frame consistency check.

Discrepancy and population values quoted here were produced by this module's
own calls and then frozen.
"""

import numpy as np
import pytest

from mfcd.bloch import integrate_bloch
from mfcd.errors import FrameError, InvariantViolation, ScheduleRangeError
from mfcd.model import ProblemInstance, Schedule, staggered_instance
from mfcd.quantum import bitstring_to_index
from mfcd.rotframe import (
    AnnealScheduleExport,
    ScheduleTraces,
    evolve_hardware,
    export_schedule,
    frame_angle,
    hardware_hamiltonian,
    hardware_schedules,
    hardware_target,
    linear_baseline_traces,
    load_schedule,
    save_schedule,
    schedule_from_dict,
    schedule_to_dict,
    verify_frame_equivalence,
    write_schedule_csv,
)


@pytest.fixture(scope="module")
def staggered_traj():
    inst = staggered_instance(4, h=1.1)
    sch = Schedule(total_time=1.0, delta=1e-3)
    return inst, sch, integrate_bloch(inst, sch, cd=True, steps=2000)


@pytest.fixture(scope="module")
def toy_export():
    return AnnealScheduleExport(
        annealing_time=5.0,
        ramp_end=0.05,
        breakpoints_a=[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)],
        breakpoints_g=[(0.0, 0.0), (0.5, -0.1), (1.0, -0.25)],
    )


class TestFrameAngle:
    def test_constant_angle_profile(self):
        """B_y proportional to (1 - f) pins phi at pi/4 for the whole anneal,
        with the final node carried over from its neighbor."""
        sch = Schedule(total_time=1.0, delta=1e-3)
        grid = np.linspace(0.0, 1.0, 101)
        by = (1.0 - sch.f(grid))[:, None]
        fa = frame_angle(sch, (grid, by))
        assert np.all(fa.phi == np.pi / 4)
        assert np.all(fa.phi_dot == 0.0)
        assert fa.final_convention == "carried-previous-node"

    def test_zero_profile_gives_zero_angle(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        grid = np.linspace(0.0, 1.0, 51)
        fa = frame_angle(sch, (grid, np.zeros((51, 1))))
        assert np.all(fa.phi == 0.0)

    def test_undefined_interior_angle(self):
        # gamma_d = 0 zeroes the x argument everywhere, so a zero B_y makes
        # the frame undefined already at interior times
        sch = Schedule(total_time=1.0, delta=1e-3)
        grid = np.linspace(0.0, 1.0, 51)
        with pytest.raises(FrameError, match="interior"):
            frame_angle(sch, (grid, np.zeros((51, 1))), gamma_d=0.0)

    def test_grid_mismatch(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        with pytest.raises(ValueError):
            frame_angle(sch, (np.linspace(0, 1, 11), np.zeros((10, 1))))


class TestHardwareSchedules:
    def test_baseline_transverse_schedule_equals_f(self):
        """With B_y = 0 the A schedule reduces to f exactly."""
        sch = Schedule(total_time=1.0, delta=1e-3)
        traces = linear_baseline_traces(sch, n_nodes=2000)
        assert np.array_equal(traces.a, sch.f(traces.grid))
        assert traces.a[0] == 0.0
        assert traces.a[-1] == 1.0

    def test_complement_is_exact(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        traces = linear_baseline_traces(sch, n_nodes=500)
        assert np.all(traces.a + traces.b == 1.0)

    def test_longitudinal_midpoint_value(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        traces = linear_baseline_traces(sch, n_nodes=2000)
        # g' = -(g + phi_dot/2) / (12 A) with g(T/2) = 0.501 and A ~ 1/2
        assert float(traces.g_prime[1000]) == pytest.approx(-0.501 / 6.0, rel=1e-14)

    def test_undefined_where_a_vanishes(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        traces = linear_baseline_traces(sch, n_nodes=500)
        assert np.isnan(traces.g_prime[0])
        assert not np.any(np.isnan(traces.g_prime[1:]))

    def test_sign_flipped_profiles_collapse(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        grid = np.linspace(0.0, 1.0, 101)
        c = (0.1 * (1.0 - sch.f(grid)))[:, None]
        both = np.hstack([c, -c])
        fa = frame_angle(sch, (grid, both))
        traces = hardware_schedules(sch, (grid, both), sch.g(grid), fa)
        fa1 = frame_angle(sch, (grid, c))
        single = hardware_schedules(sch, (grid, c), sch.g(grid), fa1)
        assert np.array_equal(traces.a, single.a)
        assert np.array_equal(traces.g_prime, single.g_prime, equal_nan=True)

    def test_mismatched_profiles_rejected(self):
        sch = Schedule(total_time=1.0, delta=1e-3)
        grid = np.linspace(0.0, 1.0, 101)
        c = (0.1 * (1.0 - sch.f(grid)))[:, None]
        both = np.hstack([c, 1.5 * c])
        fa = frame_angle(sch, (grid, both))
        with pytest.raises(ValueError, match="uniform profile"):
            hardware_schedules(sch, (grid, both), sch.g(grid), fa)


class TestExport:
    def test_breakpoint_set(self, staggered_traj):
        inst, sch, traj = staggered_traj
        fa = frame_angle(sch, traj, gamma_d=inst.gamma_d)
        traces = hardware_schedules(sch, traj, sch.g(traj.grid), fa)
        exp = export_schedule(traces, n_breakpoints=100, ramp_end=0.187)
        s = [p[0] for p in exp.breakpoints_a]
        assert s[0] == 0.0 and s[-1] == 1.0
        assert 0.187 in s
        assert s == sorted(s)
        assert [p[0] for p in exp.breakpoints_g] == s
        assert max(abs(v) for _, v in exp.breakpoints_g) <= 3.0

    def test_ramp_is_linear_below_ramp_end(self, staggered_traj):
        inst, sch, traj = staggered_traj
        fa = frame_angle(sch, traj, gamma_d=inst.gamma_d)
        traces = hardware_schedules(sch, traj, sch.g(traj.grid), fa)
        exp = export_schedule(traces, n_breakpoints=100, ramp_end=0.187)
        gmap = dict(exp.breakpoints_g)
        g_end = gmap[0.187]
        for s, v in exp.breakpoints_g:
            if s < 0.187:
                assert v == s / 0.187 * g_end

    def test_range_violation_is_an_error(self):
        # pushing the ramp toward s = 0 exposes the g + phi_dot / (12 A)
        # divergence; the export must refuse rather than clamp
        sch = Schedule(total_time=1.0, delta=1e-3)
        traces = linear_baseline_traces(sch, n_nodes=2000)
        with pytest.raises(ScheduleRangeError) as err:
            export_schedule(traces, n_breakpoints=100, ramp_end=0.001)
        assert err.value.offending
        s0, g0 = err.value.offending[0]
        assert abs(g0) > 3.0

    def test_boundary_violation_is_an_error(self):
        grid = np.linspace(0.0, 1.0, 11)
        traces = ScheduleTraces(
            grid=grid,
            total_time=1.0,
            a=np.linspace(0.1, 1.0, 11),
            b=1.0 - np.linspace(0.1, 1.0, 11),
            g_prime=np.zeros(11),
        )
        with pytest.raises(InvariantViolation, match="boundary"):
            export_schedule(traces, n_breakpoints=10, ramp_end=0.05)

    def test_parameter_validation(self, staggered_traj):
        inst, sch, traj = staggered_traj
        fa = frame_angle(sch, traj, gamma_d=inst.gamma_d)
        traces = hardware_schedules(sch, traj, sch.g(traj.grid), fa)
        with pytest.raises(ValueError):
            export_schedule(traces, n_breakpoints=3)
        with pytest.raises(ValueError):
            export_schedule(traces, ramp_end=0.0)
        with pytest.raises(ValueError):
            export_schedule(traces, ramp_end=1.0)

    def test_round_trip(self, tmp_path, toy_export):
        assert schedule_from_dict(schedule_to_dict(toy_export)) == toy_export
        path = tmp_path / "schedule.json"
        save_schedule(toy_export, path)
        assert load_schedule(path) == toy_export

    def test_csv_alignment_guard(self, tmp_path, toy_export):
        path = tmp_path / "schedule.csv"
        write_schedule_csv(toy_export, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "s,A,g_prime"
        assert len(lines) == 4
        bad = AnnealScheduleExport(
            annealing_time=toy_export.annealing_time,
            ramp_end=toy_export.ramp_end,
            breakpoints_a=toy_export.breakpoints_a,
            breakpoints_g=[(0.1, 0.0)] + toy_export.breakpoints_g[1:],
        )
        with pytest.raises(ValueError, match="alignment"):
            write_schedule_csv(bad, tmp_path / "bad.csv")


class TestHardwareForm:
    def test_hamiltonian_worked_example(self, toy_export):
        inst = ProblemInstance(
            1, np.zeros((1, 1)), np.array([1.0]), gamma=0.0, gamma_d=1.0
        )
        h = hardware_hamiltonian(inst, toy_export, 0.5)
        assert h[0, 0] == -0.2 and h[1, 1] == 0.2
        assert h[0, 1] == h[1, 0] == -(1.0 - 0.5) / 3.0

    def test_target_bitstring(self, toy_export):
        inst = ProblemInstance(
            1, np.zeros((1, 1)), np.array([1.0]), gamma=0.0, gamma_d=1.0
        )
        assert hardware_target(inst, toy_export) == "0"

    def test_degenerate_target_is_an_error(self):
        inst = ProblemInstance(
            1, np.zeros((1, 1)), np.array([1.0]), gamma=0.0, gamma_d=1.0
        )
        flat = AnnealScheduleExport(
            annealing_time=1.0,
            ramp_end=0.05,
            breakpoints_a=[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)],
            breakpoints_g=[(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)],
        )
        with pytest.raises(InvariantViolation, match="degenerate"):
            hardware_target(inst, flat)

    def test_compiled_target_matches_problem(self, staggered_traj):
        inst, sch, traj = staggered_traj
        fa = frame_angle(sch, traj, gamma_d=inst.gamma_d)
        traces = hardware_schedules(sch, traj, sch.g(traj.grid), fa)
        exp = export_schedule(traces, n_breakpoints=100, ramp_end=0.187)
        assert hardware_target(inst, exp) == "0101"

    def test_slow_toy_anneal_reaches_target(self, toy_export):
        inst = ProblemInstance(
            1, np.zeros((1, 1)), np.array([1.0]), gamma=0.0, gamma_d=1.0
        )
        res = evolve_hardware(inst, toy_export, steps=1000, n_output=2)
        assert res.norm_drift < 1e-8
        pop = abs(res.states[-1][bitstring_to_index("0")]) ** 2
        assert float(pop) == pytest.approx(0.9369125940692663, rel=1e-9)

    def test_evolution_validation(self, toy_export):
        inst = ProblemInstance(
            1, np.zeros((1, 1)), np.array([1.0]), gamma=0.0, gamma_d=1.0
        )
        with pytest.raises(ValueError, match="energy_scale"):
            evolve_hardware(inst, toy_export, energy_scale=0.0)
        bare = ProblemInstance(
            1, np.zeros((1, 1)), np.array([0.0]), gamma=0.0, gamma_d=1.0
        )
        with pytest.raises(ValueError, match="longitudinal"):
            evolve_hardware(bare, toy_export)


class TestFrameEquivalence:
    def test_lab_and_rotating_frames_agree(self, staggered_traj):
        inst, sch, traj = staggered_traj
        report = verify_frame_equivalence(inst, sch, traj, 1.0, 1000)
        assert report.discrepancy < 1e-6
        assert report.discrepancy == pytest.approx(2.9268809598193e-12, rel=1e-6)
        assert report.lab_norm_drift < 1e-8
        assert report.rot_norm_drift < 1e-8

    def test_discrepancy_converges_with_step(self, staggered_traj):
        inst, sch, traj = staggered_traj
        coarse = verify_frame_equivalence(inst, sch, traj, 1.0, 500)
        fine = verify_frame_equivalence(inst, sch, traj, 1.0, 1000)
        assert coarse.discrepancy / fine.discrepancy >= 4.0

    def test_requires_vanishing_gamma(self, staggered_traj):
        _, sch, traj = staggered_traj
        tilted = ProblemInstance(
            4,
            staggered_instance(4, h=1.1).couplings,
            staggered_instance(4, h=1.1).fields,
            gamma=0.1,
            gamma_d=1.0,
        )
        with pytest.raises(ValueError, match="gamma"):
            verify_frame_equivalence(tilted, sch, traj, 1.0, 500)

    def test_time_mismatch_rejected(self, staggered_traj):
        inst, sch, traj = staggered_traj
        with pytest.raises(ValueError, match="total_time"):
            verify_frame_equivalence(inst, sch, traj, 2.0, 500)
