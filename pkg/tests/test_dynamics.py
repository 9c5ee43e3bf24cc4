import math

import numpy as np
import pytest

from aeolus import dynamics, hull, ocean, terrain
from aeolus.geometry import quat_from_axis_angle, signed_horizontal_angle

CFG = dynamics.EnvironmentForcesConfig()
RHO_G = 1025.0 * 9.81


def flat_split(vessel):
    wv = vessel.world_vertices()
    tri = vessel.triangles
    c = wv[tri]
    e = wv[:, 1][tri]
    cross = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    nrm = np.linalg.norm(cross, axis=1)
    normals = cross / np.where(nrm > 0.0, nrm, 1.0)[:, None]
    owner = np.zeros(len(tri), dtype=np.int64)
    return dynamics.split_at_waterline(c, e, normals, owner)


class TestSplitAtWaterline:
    def test_fully_submerged_unchanged(self):
        mesh = hull.box_mesh((1.0, 1.0, 1.0))
        v = dynamics.Vessel(mesh, target_mass=500.0)
        v.state.position = np.array([0.0, -10.0, 0.0])
        sub, dry = flat_split(v)
        assert len(sub.areas) == mesh.triangle_count
        assert len(dry.areas) == 0
        assert np.all(sub.depths < 0.0)

    def test_area_conservation_random(self):
        rng = np.random.default_rng(3)
        corners = rng.normal(size=(800, 3, 3)) * 2.0
        elev = corners[:, :, 1] - rng.normal(size=(800, 1)) * 0.4
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        nrm = np.linalg.norm(cross, axis=1)
        normals = cross / np.where(nrm > 0, nrm, 1.0)[:, None]
        owner = np.zeros(800, dtype=np.int64)
        sub, dry = dynamics.split_at_waterline(corners, elev, normals, owner)
        total = 0.5 * nrm.sum()
        got = sub.areas.sum() + dry.areas.sum()
        assert abs(got - total) / total < 1e-6

    def test_submerged_depths_nonpositive(self):
        rng = np.random.default_rng(4)
        corners = rng.normal(size=(300, 3, 3))
        elev = corners[:, :, 1] + rng.normal(size=(300, 1)) * 0.3
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        nrm = np.linalg.norm(cross, axis=1)
        normals = cross / np.where(nrm > 0, nrm, 1.0)[:, None]
        owner = np.zeros(300, dtype=np.int64)
        sub, _ = dynamics.split_at_waterline(corners, elev, normals, owner)
        assert np.all(sub.depths <= 0.0)

    def test_vertex_on_surface_continuity(self):
        # as a vertex approaches the surface from below, the submerged area
        # of the one-below triangle goes to zero
        base = np.array([[0.0, 0.1, 0.0], [1.0, 0.2, 0.0], [0.0, 0.3, 1.0]])
        normal = np.array([[0.0, 1.0, 0.0]])
        owner = np.zeros(1, dtype=np.int64)
        areas = []
        for depth in (0.2, 0.1, 1e-4, 1e-8):
            c = base.copy()
            c[0, 1] = -depth
            e = c[:, 1:2].T.copy()
            sub, _ = dynamics.split_at_waterline(c[None], e, normal, owner)
            areas.append(sub.areas.sum())
        assert areas[0] > areas[1] > areas[2] > areas[3]
        assert areas[3] < 1e-14

    def test_monte_carlo_area_oracle(self):
        # dense barycentric sampling classifies points against the same
        # per-vertex linear elevation the splitter uses
        rng = np.random.default_rng(11)
        corners = rng.normal(size=(60, 3, 3))
        elev = corners[:, :, 1] - 0.05
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        nrm = np.linalg.norm(cross, axis=1)
        normals = cross / np.where(nrm > 0, nrm, 1.0)[:, None]
        owner = np.arange(60, dtype=np.int64)
        sub, _ = dynamics.split_at_waterline(corners, elev, normals, owner)
        sub_area_per_tri = np.zeros(60)
        np.add.at(sub_area_per_tri, sub.owner, sub.areas)

        n_samp = 10_000
        w = rng.dirichlet((1.0, 1.0, 1.0), size=n_samp)
        for t in range(60):
            h = w @ elev[t]
            frac = float((h <= 0.0).mean())
            mc_area = frac * 0.5 * nrm[t]
            assert abs(mc_area - sub_area_per_tri[t]) <= 0.012 * 0.5 * nrm[t] + 1e-12


class TestHydrostatics:
    @pytest.mark.parametrize(
        "mesh,volume",
        [
            (hull.box_mesh((1.0, 1.0, 1.0), subdivisions=7), 1.0),
            (hull.icosphere(0.8, 3), hull.icosphere(0.8, 3).signed_volume()),
        ],
    )
    def test_archimedes_fully_submerged(self, mesh, volume):
        assert mesh.triangle_count >= 500
        v = dynamics.Vessel(mesh, target_mass=100.0)
        v.state.position = np.array([0.0, -10.0, 0.0])
        f = dynamics.buoyant_force_flat(v, CFG)
        assert abs(f[1] - RHO_G * volume) / (RHO_G * volume) < 0.01
        assert abs(f[0]) < 1e-6 * abs(f[1])
        assert abs(f[2]) < 1e-6 * abs(f[1])

    def test_symmetric_immersion_torque_vanishes(self):
        mesh = hull.box_mesh((2.0, 1.0, 1.0), subdivisions=6)
        v = dynamics.Vessel(mesh, target_mass=800.0)
        v.state.position = np.array([0.0, -0.2, 0.0])
        sub, _ = flat_split(v)
        acc = dynamics.ForceAccumulator(1)
        dynamics.hydro_forces(
            sub,
            acc,
            v.state.position[None],
            np.zeros((1, 3)),
            np.zeros((1, 3)),
            np.zeros(1),
            np.array([2.0]),
            CFG,
        )
        force = np.linalg.norm(acc.force[0])
        torque = np.linalg.norm(acc.torque[0])
        assert torque < 1e-6 * force * 2.0

    def test_force_locality_under_refinement(self):
        coarse = hull.box_mesh((2.0, 1.0, 1.0), subdivisions=4)
        fine = hull.box_mesh((2.0, 1.0, 1.0), subdivisions=8)
        forces = []
        for mesh in (coarse, fine):
            v = dynamics.Vessel(mesh, target_mass=800.0)
            v.state.position = np.array([0.0, -0.2, 0.0])
            v.state.linear_velocity = np.array([2.0, 0.0, -0.5])
            sub, _ = flat_split(v)
            acc = dynamics.ForceAccumulator(1)
            dynamics.hydro_forces(
                sub,
                acc,
                v.state.position[None],
                v.state.linear_velocity[None],
                np.zeros((1, 3)),
                np.array([v.state.speed()]),
                np.array([2.0]),
                CFG,
            )
            forces.append(acc.force[0])
        rel = np.linalg.norm(forces[1] - forces[0]) / np.linalg.norm(forces[1])
        assert rel < 0.02

    def test_zero_velocity_drag_vanishes(self):
        mesh = hull.box_mesh((1.0, 1.0, 1.0), subdivisions=4)
        v = dynamics.Vessel(mesh, target_mass=500.0)
        v.state.position = np.array([0.0, -5.0, 0.0])
        sub, _ = flat_split(v)
        cfg = dynamics.EnvironmentForcesConfig(u10=8.0, current_factor=0.3)
        acc = dynamics.ForceAccumulator(1)
        dynamics.hydro_forces(
            sub,
            acc,
            v.state.position[None],
            np.zeros((1, 3)),
            np.zeros((1, 3)),
            np.zeros(1),
            np.array([1.0]),
            cfg,
        )
        # V = 0 everywhere: S_F = 0, so drag and the wind-current term both
        # drop out and only buoyancy remains
        buoy = dynamics.buoyant_force_flat(v, cfg)
        assert np.allclose(acc.force[0], buoy, rtol=1e-9)

    def test_settled_draft_density_512(self):
        mesh = hull.box_mesh((1.0, 1.0, 1.0), subdivisions=6)
        mass, _, _ = hull.mass_properties(mesh, density=512.0)
        v = dynamics.Vessel(mesh, target_mass=mass)
        y = dynamics.settle_to_draft(v, CFG)
        draft = 0.5 - y
        assert abs(draft - 0.5) <= 0.03 * 0.5 + 1e-9


class TestAeroForces:
    def _patch(self, normal):
        return dynamics.TrianglePatch(
            areas=np.array([1.0]),
            centroids=np.zeros((1, 3)),
            normals=np.asarray(normal, dtype=float)[None],
            depths=np.array([0.5]),
            owner=np.zeros(1, dtype=np.int64),
        )

    def test_zero_wind_zero_force(self):
        acc = dynamics.ForceAccumulator(1)
        cfg = dynamics.EnvironmentForcesConfig(u10=0.0)
        dynamics.aero_forces(self._patch([1.0, 0.0, 0.0]), acc, np.zeros((1, 3)), cfg)
        assert not acc.force.any()

    def test_normal_perpendicular_to_wind(self):
        acc = dynamics.ForceAccumulator(1)
        cfg = dynamics.EnvironmentForcesConfig(u10=10.0, wind_direction=0.0)
        dynamics.aero_forces(self._patch([0.0, 1.0, 0.0]), acc, np.zeros((1, 3)), cfg)
        assert np.allclose(acc.force[0], 0.0, atol=1e-12)

    def test_flat_plate_facing_wind(self):
        acc = dynamics.ForceAccumulator(1)
        cfg = dynamics.EnvironmentForcesConfig(u10=10.0, wind_direction=0.0)
        dynamics.aero_forces(self._patch([-1.0, 0.0, 0.0]), acc, np.zeros((1, 3)), cfg)
        assert np.linalg.norm(acc.force[0]) == pytest.approx(61.25, rel=1e-12)


class TestPropulsion:
    def _vessel(self):
        v = dynamics.Vessel(hull.vee_hull(subdivisions=4), target_mass=3500.0)
        return v

    def test_zero_thrust(self):
        v = self._vessel()
        assert not dynamics.propulsion_force((0.0, 0.5), v.state, CFG).any()

    def test_thrust_magnitude_at_speed(self):
        v = self._vessel()
        v.state.linear_velocity = np.array([10.0, 0.0, 0.0])
        f = dynamics.propulsion_force((1.0, 0.0), v.state, CFG)
        # 0.75 * 223710 W / 10 m/s
        assert np.linalg.norm(f) == pytest.approx(16778.25, rel=1e-9)

    def test_yaw_moments_mirrored(self):
        v = self._vessel()
        arm = v.stern_local
        torques = []
        for yaw in (1.0, -1.0):
            f = dynamics.propulsion_force((0.7, yaw), v.state, CFG)
            torques.append(np.cross(arm, f))
        assert torques[0][1] == pytest.approx(-torques[1][1], rel=1e-12)
        assert abs(torques[0][1]) > 0.0

    def test_positive_yaw_turns_bow_starboard(self):
        v = self._vessel()
        dynamics.settle_to_draft(v, CFG)
        for _ in range(80):
            dynamics.step_vessels([v], [(0.6, 1.0)], None, None, 0.02, CFG)
        heading = signed_horizontal_angle(np.array([1.0, 0.0, 0.0]), v.state.forward())
        assert 5.0 < heading < 175.0

    def test_speed_floor_at_rest(self):
        v = self._vessel()
        f = dynamics.propulsion_force((1.0, 0.0), v.state, CFG)
        assert np.linalg.norm(f) == pytest.approx(0.75 * 223_710.0 / 1.0, rel=1e-12)


class TestStep:
    def test_free_drift_exact(self):
        v = dynamics.Vessel(hull.box_mesh((1.0, 1.0, 1.0)), target_mass=100.0)
        v.state.linear_velocity = np.array([1.0, 0.0, 0.0])
        p0 = v.state.position.copy()
        dynamics.step_vessels([v], [(0, 0)], None, None, 0.02, CFG, disable_forces=True)
        assert np.array_equal(v.state.position - p0, np.array([0.02, 0.0, 0.0]))

    def test_free_drift_energy_constant(self):
        v = dynamics.Vessel(hull.box_mesh((1.0, 1.0, 1.0)), target_mass=100.0)
        v.state.linear_velocity = np.array([3.0, 1.0, -2.0])
        e0 = dynamics.kinetic_energy(v.state)
        for _ in range(500):
            dynamics.step_vessels(
                [v], [(0, 0)], None, None, 0.02, CFG, disable_forces=True
            )
            assert abs(dynamics.kinetic_energy(v.state) - e0) < 1e-9

    def test_drop_settles_to_archimedes_draft(self):
        mesh = hull.box_mesh((1.0, 1.0, 1.0), subdivisions=6)
        mass, _, _ = hull.mass_properties(mesh, density=512.0)
        v = dynamics.Vessel(mesh, target_mass=mass)
        v.state.position = np.array([0.0, 1.0, 0.0])
        for _ in range(3000):  # 60 simulated seconds
            dynamics.step_vessels([v], [(0.0, 0.0)], None, None, 0.02, CFG)
        draft = 0.5 - v.state.position[1]
        assert abs(draft - 0.5) <= 0.03 * 0.5

    def test_overlapping_vessels_both_flagged(self):
        mesh = hull.vee_hull(subdivisions=4)
        a = dynamics.Vessel(mesh, target_mass=3500.0)
        b = dynamics.Vessel(mesh, target_mass=3500.0)
        dynamics.settle_to_draft(a, CFG)
        dynamics.settle_to_draft(b, CFG)
        b.state.position = a.state.position + np.array([3.0, 0.0, 0.0])
        info = dynamics.step_vessels([a, b], [(0, 0), (0, 0)], None, None, 0.02, CFG)
        assert info.collision_vessel[0] and info.collision_vessel[1]
        assert info.collision[0] and info.collision[1]

    def test_contact_pushes_vessels_apart(self):
        mesh = hull.vee_hull(subdivisions=4)
        a = dynamics.Vessel(mesh, target_mass=3500.0)
        b = dynamics.Vessel(mesh, target_mass=3500.0)
        dynamics.settle_to_draft(a, CFG)
        dynamics.settle_to_draft(b, CFG)
        b.state.position = a.state.position + np.array([3.0, 0.0, 0.0])
        info = None
        for _ in range(600):
            info = dynamics.step_vessels([a, b], [(0, 0), (0, 0)], None, None, 0.02, CFG)
        assert not info.collision_vessel.any()
        assert np.linalg.norm(a.state.position - b.state.position) > 8.0

    def test_terrain_collision_flag_and_response(self):
        fld = terrain.TerrainField(
            heights=np.full((64, 64), 2.0), cell_size=10.0, origin=np.array([-320.0, -320.0])
        )
        mesh = hull.box_mesh((1.0, 1.0, 1.0), subdivisions=3)
        v = dynamics.Vessel(mesh, target_mass=500.0)
        v.state.position = np.array([0.0, 1.5, 0.0])
        info = dynamics.step_vessels([v], [(0, 0)], None, fld, 0.02, CFG)
        assert info.collision_terrain[0]
        for _ in range(200):
            dynamics.step_vessels([v], [(0, 0)], None, fld, 0.02, CFG)
        assert v.state.position[1] > 1.5  # pushed up and out of the ground

    def test_enclosure_keeps_vessel_inside(self):
        mesh = hull.vee_hull(subdivisions=4)
        v = dynamics.Vessel(mesh, target_mass=3500.0)
        dynamics.settle_to_draft(v, CFG)
        v.state.position[0] = 40.0
        bounds = (-50.0, 50.0, -50.0, 50.0)
        for _ in range(2500):
            dynamics.step_vessels(
                [v], [(1.0, 0.0)], None, None, 0.02, CFG, enclosures=[bounds]
            )
        assert v.state.position[0] < 60.0
        assert abs(v.state.position[2]) < 60.0

    def test_quaternion_stays_normalized(self):
        mesh = hull.vee_hull(subdivisions=4)
        v = dynamics.Vessel(mesh, target_mass=3500.0)
        dynamics.settle_to_draft(v, CFG)
        for _ in range(1000):
            dynamics.step_vessels([v], [(1.0, 0.8)], None, None, 0.02, CFG)
            assert abs(np.linalg.norm(v.state.orientation) - 1.0) < 1e-6

    def test_nan_state_raises(self):
        mesh = hull.box_mesh((1.0, 1.0, 1.0))
        v = dynamics.Vessel(mesh, target_mass=100.0)
        v.state.linear_velocity = np.array([np.nan, 0.0, 0.0])
        with pytest.raises(dynamics.SimulationNaNError):
            dynamics.step_vessels([v], [(0, 0)], None, None, 0.02, CFG)

    def test_deterministic_trajectories(self):
        def run():
            mesh = hull.vee_hull(subdivisions=4)
            grid = ocean.build_spectrum_grid(
                ocean.SpectrumConfig(kind="PM", u10=6.0), 64, 500.0, seed=5
            )
            v = dynamics.Vessel(mesh, target_mass=3500.0)
            dynamics.settle_to_draft(v, CFG)
            cfg = dynamics.EnvironmentForcesConfig(u10=6.0)
            out = []
            for i in range(200):
                fld = ocean.synthesize(grid, i * 0.02, 0.6)
                dynamics.step_vessels([v], [(0.8, 0.2)], fld, None, 0.02, cfg)
                out.append(v.state.position.copy())
            return np.array(out)

        assert np.array_equal(run(), run())

    def test_fastpath_matches_reference(self):
        mesh = hull.vee_hull(subdivisions=7)
        grid = ocean.build_spectrum_grid(
            ocean.SpectrumConfig(kind="PM", u10=7.0), 64, 500.0, seed=2
        )
        fld = ocean.synthesize(grid, 0.45, 0.6)
        cfg = dynamics.EnvironmentForcesConfig(u10=7.0, wind_direction=0.3)

        def fresh():
            rng = np.random.default_rng(9)
            out = []
            for i in range(6):
                v = dynamics.Vessel(mesh, target_mass=3500.0)
                dynamics.settle_to_draft(v, cfg)
                v.state.position[0] = i * 40.0
                v.state.linear_velocity = rng.normal(size=3) * 2.0
                v.state.angular_velocity = rng.normal(size=3) * 0.2
                v.state.orientation = quat_from_axis_angle(
                    rng.normal(size=3), rng.uniform(0.0, 0.4)
                )
                out.append(v)
            return out

        acts = np.random.default_rng(1).uniform(-1, 1, (6, 2))
        a, b = fresh(), fresh()
        for _ in range(10):
            dynamics.step_vessels(a, acts, fld, None, 0.02, cfg, use_fastpath=True)
            dynamics.step_vessels(b, acts, fld, None, 0.02, cfg, use_fastpath=False)
        for va, vb in zip(a, b):
            assert np.allclose(va.state.position, vb.state.position, atol=1e-9)
            assert np.allclose(
                va.state.linear_velocity, vb.state.linear_velocity, atol=1e-9
            )


class TestCoefficients:
    def test_drag_curve_low_re_stokes(self):
        assert float(dynamics.drag_coefficient(0.1)) == pytest.approx(240.0, rel=1e-12)

    def test_drag_curve_interpolates_monotone_segments(self):
        assert 0.41 < float(dynamics.drag_coefficient(3e4)) < 0.47

    def test_drag_curve_end_clamped(self):
        assert float(dynamics.drag_coefficient(1e12)) == pytest.approx(0.33, rel=1e-12)

    def test_friction_line_value(self):
        # ITTC line at Re = 1e6: 0.075 / (6 - 2)^2
        assert float(dynamics.friction_coefficient(1e6)) == pytest.approx(
            0.075 / 16.0, rel=1e-12
        )

    def test_friction_pole_guarded(self):
        assert np.isfinite(float(dynamics.friction_coefficient(100.0)))
