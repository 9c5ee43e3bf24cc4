"""Rigid-body vessel dynamics: per-triangle hull forces and time stepping.

Every submerged (sub-)triangle receives hydrostatic lift, pressure drag and a
combined friction/wind-current force; dry triangles receive aerodynamic drag.
Forces are applied at triangle centroids so the 6-DOF response (heave, pitch,
roll included) emerges from the hull geometry.  Integration is semi-implicit
Euler at a fixed timestep and all accumulation runs in a fixed triangle
order, so trajectories are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _fastpath as fastpath
from . import terrain as terrain_mod
from .geometry import (
    quat_identity,
    quat_integrate,
    quat_normalize,
    quat_to_matrix,
    quats_to_matrices,
)
from .hull import HullMesh, mass_properties, stern_point
from .ocean import OceanField, sample_surface

UP = np.array([0.0, 1.0, 0.0])

# smooth-body drag curve C_D(Re), digitized as a 12-point log-log table
# (Stokes rise, plateau, drag crisis, post-critical recovery)
_CD_RE = np.array([1e-1, 1e0, 1e1, 1e2, 1e3, 1e4, 1e5, 2e5, 4e5, 1e6, 3e6, 1e7])
_CD_VAL = np.array([240.0, 26.5, 4.1, 1.1, 0.47, 0.41, 0.47, 0.42, 0.09, 0.13, 0.20, 0.33])
_LOG_CD_RE = np.log10(_CD_RE)
_LOG_CD_VAL = np.log10(_CD_VAL)


class SimulationNaNError(RuntimeError):
    """Raised when an integration step produces a non-finite state."""


@dataclass(frozen=True)
class EnvironmentForcesConfig:
    air_density: float = 1.225
    sea_density: float = 1025.0
    gravity: float = 9.81
    current_factor: float = 0.2       # w_C, scales wind-driven surface current
    drag_exponent: float = 1.0        # q >= 1
    wind_direction: float = 0.0       # radians from +x, horizontal
    u10: float = 0.0                  # wind speed used by aero/current terms
    dynamic_viscosity: float = 0.00109
    propulsion_efficiency: float = 0.75
    thrust_speed_floor: float = 1.0   # avoids the 1/|U| blow-up at rest
    yaw_max_deg: float = 30.0         # thrust-vector deflection at full yaw
    contact_stiffness: float = 1.0e6  # penalty spring [N/m]
    contact_damping: float = 1.0e4    # penalty damper [N s/m]
    # rigid-body damping applied by the integrator, PhysX-style
    # (w *= 1/(1 + c*dt)).  The per-triangle forces carry almost no
    # tangential-flow damping, so without this a planing hull has an
    # undamped broach mode at cruise speed.
    angular_damping: float = 1.0
    linear_damping: float = 0.0

    def __post_init__(self):
        if self.drag_exponent < 1.0:
            raise ValueError("drag exponent must be >= 1")
        if self.air_density <= 0.0:
            raise ValueError("air density must be positive")

    @property
    def wind_unit(self) -> np.ndarray:
        return np.array(
            [math.cos(self.wind_direction), 0.0, math.sin(self.wind_direction)]
        )


def drag_coefficient(reynolds):
    """Figure-style C_D(Re) lookup, log-log interpolated and end-clamped."""
    logre = np.log10(np.clip(np.asarray(reynolds, dtype=float), _CD_RE[0], _CD_RE[-1]))
    return 10.0 ** np.interp(logre, _LOG_CD_RE, _LOG_CD_VAL)


def friction_coefficient(reynolds):
    """ITTC-style flat-plate friction line; Re clamped away from the log pole."""
    re = np.clip(np.asarray(reynolds, dtype=float), 1.0e3, 1.0e9)
    return 0.075 / (np.log10(re) - 2.0) ** 2


@dataclass
class VesselState:
    position: np.ndarray                 # CoM, world frame [m]
    orientation: np.ndarray              # unit quaternion [w, x, y, z]
    linear_velocity: np.ndarray          # [m/s]
    angular_velocity: np.ndarray         # world frame [rad/s]
    mass: float
    inertia: np.ndarray                  # body frame, about the CoM
    axial_length: float = 8.0
    max_speed: float = 25.0
    engine_power: float = 223_710.0      # 300 hp

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.orientation)

    def forward(self) -> np.ndarray:
        return self.rotation()[:, 0]

    def speed(self) -> float:
        return float(np.linalg.norm(self.linear_velocity))


class Vessel:
    """A hull mesh bound to a rigid-body state.

    Mesh vertices are re-expressed relative to the centre of mass so the
    state position is the CoM and torques need no extra offsets.
    """

    def __init__(
        self,
        mesh: HullMesh,
        target_mass: float = 3500.0,
        max_speed: float = 25.0,
        engine_power: float = 223_710.0,
        power_scale: float = 1.0,
    ):
        mass, com, inertia = mass_properties(mesh, target_mass=target_mass)
        self.mesh = mesh
        self.vertices_local = mesh.vertices - com
        self.triangles = mesh.triangles
        self.tri_areas_local = mesh.areas.copy()
        self.tri_normals_local = mesh.normals.copy()
        self.tri_centroids_local = mesh.centroids - com
        self.stern_local = stern_point(mesh) - com
        length = float(
            np.max(mesh.vertices[:, 0]) - np.min(mesh.vertices[:, 0])
        )
        self.aabb_lo = self.vertices_local.min(axis=0)
        self.aabb_hi = self.vertices_local.max(axis=0)
        self.bounding_radius = float(
            np.max(np.linalg.norm(self.vertices_local, axis=1))
        )
        self.power_scale = power_scale
        self.state = VesselState(
            position=np.zeros(3),
            orientation=quat_identity(),
            linear_velocity=np.zeros(3),
            angular_velocity=np.zeros(3),
            mass=mass,
            inertia=inertia,
            axial_length=length,
            max_speed=max_speed,
            engine_power=engine_power,
        )
        self._inv_inertia_body = np.linalg.inv(inertia)

    def world_vertices(self) -> np.ndarray:
        r = self.state.rotation()
        return self.state.position + self.vertices_local @ r.T


@dataclass
class TrianglePatch:
    """Flat batch of (sub-)triangles with owning-vessel row ids."""

    areas: np.ndarray      # (M,)
    centroids: np.ndarray  # (M, 3)
    normals: np.ndarray    # (M, 3)
    depths: np.ndarray     # (M,), centroid height above the local surface
    owner: np.ndarray      # (M,) int

    @classmethod
    def empty(cls) -> "TrianglePatch":
        return cls(
            np.zeros(0),
            np.zeros((0, 3)),
            np.zeros((0, 3)),
            np.zeros(0),
            np.zeros(0, dtype=np.int64),
        )


def _patch_from_corners(c0, c1, c2, normals, elev, owner) -> TrianglePatch:
    cross = np.cross(c1 - c0, c2 - c0)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    centroids = (c0 + c1 + c2) / 3.0
    depths = elev.mean(axis=1)
    return TrianglePatch(areas, centroids, normals, depths, owner)


# canonical permutation per sign pattern: odd vertex first, cyclic order kept
_PERM_LUT = np.zeros((8, 3), dtype=np.int64)
for _code, _perm in {4: (0, 1, 2), 2: (1, 2, 0), 1: (2, 0, 1),
                     3: (0, 1, 2), 5: (1, 2, 0), 6: (2, 0, 1)}.items():
    _PERM_LUT[_code] = _perm
_A_BELOW_LUT = np.zeros(8, dtype=bool)
_A_BELOW_LUT[[4, 2, 1]] = True

_FLAT_GRID = np.zeros((1, 1))


def _clip_mixed(m_corners, m_elev, m_norm, m_owner, m_code):
    """Cut waterline-crossing triangles; returns (apex, quad1, quad2, a_below).

    The apex piece lies on the lone vertex's side, the two quad pieces on the
    other; ``a_below`` says which side the apex is on.
    """
    perm = _PERM_LUT[m_code]
    rows = np.arange(len(m_code))[:, None]
    pc = m_corners[rows, perm]          # (m, 3, 3) canonical corners
    pe = m_elev[rows, perm]             # (m, 3) canonical elevations
    a_below = _A_BELOW_LUT[m_code]

    ha, hb, hc = pe[:, 0], pe[:, 1], pe[:, 2]
    pa, pb, pcn = pc[:, 0], pc[:, 1], pc[:, 2]
    t_ab = (ha / np.where(ha != hb, ha - hb, 1.0))[:, None]
    t_ca = (hc / np.where(hc != ha, hc - ha, 1.0))[:, None]
    i_ab = pa + t_ab * (pb - pa)
    i_ca = pcn + t_ca * (pa - pcn)

    zeros = np.zeros_like(ha)
    apex = _patch_from_corners(
        pa, i_ab, i_ca, m_norm, np.stack([ha, zeros, zeros], axis=1), m_owner
    )
    quad1 = _patch_from_corners(
        i_ab, pb, pcn, m_norm, np.stack([zeros, hb, hc], axis=1), m_owner
    )
    quad2 = _patch_from_corners(
        i_ab, pcn, i_ca, m_norm, np.stack([zeros, hc, zeros], axis=1), m_owner
    )
    return apex, quad1, quad2, a_below


def _select(patch: TrianglePatch, mask) -> TrianglePatch:
    return TrianglePatch(
        patch.areas[mask],
        patch.centroids[mask],
        patch.normals[mask],
        patch.depths[mask],
        patch.owner[mask],
    )


def _merge(parts) -> TrianglePatch:
    if not parts:
        return TrianglePatch.empty()
    if len(parts) == 1:
        return parts[0]
    return TrianglePatch(
        np.concatenate([p.areas for p in parts]),
        np.concatenate([p.centroids for p in parts]),
        np.concatenate([p.normals for p in parts]),
        np.concatenate([p.depths for p in parts]),
        np.concatenate([p.owner for p in parts]),
    )


def split_at_waterline(corners, elevations, normals, owner, areas=None, centroids=None):
    """Clip triangles against the water surface.

    ``corners`` is (M, 3, 3) world-frame vertices, ``elevations`` their
    heights above the local surface (negative = submerged).  Returns
    (submerged, dry) :class:`TrianglePatch` batches whose areas partition the
    input exactly; intersected triangles are cut along the zero-elevation
    chord and centroid depths are barycentric in the vertex elevations, so a
    submerged piece always reports a non-positive depth.

    Precomputed ``areas``/``centroids`` for the uncut triangles may be passed
    to skip recomputing them for the fully wet/dry majority.
    """
    corners = np.asarray(corners, dtype=float)
    elevations = np.asarray(elevations, dtype=float)
    below = elevations <= 0.0
    code = below[:, 0] * 4 + below[:, 1] * 2 + below[:, 2] * 1

    full_sub = code == 7
    full_dry = code == 0
    mixed = ~(full_sub | full_dry)

    if areas is None or centroids is None:
        cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        centroids = corners.mean(axis=1)

    sub_parts = []
    dry_parts = []
    if np.any(full_sub):
        sub_parts.append(
            TrianglePatch(
                areas[full_sub],
                centroids[full_sub],
                normals[full_sub],
                elevations[full_sub].mean(axis=1),
                owner[full_sub],
            )
        )
    if np.any(full_dry):
        dry_parts.append(
            TrianglePatch(
                areas[full_dry],
                centroids[full_dry],
                normals[full_dry],
                elevations[full_dry].mean(axis=1),
                owner[full_dry],
            )
        )

    if np.any(mixed):
        apex, quad1, quad2, a_below = _clip_mixed(
            corners[mixed], elevations[mixed], normals[mixed], owner[mixed], code[mixed]
        )
        sub_parts += [
            _select(apex, a_below),
            _select(quad1, ~a_below),
            _select(quad2, ~a_below),
        ]
        dry_parts += [
            _select(apex, ~a_below),
            _select(quad1, a_below),
            _select(quad2, a_below),
        ]

    return _merge(sub_parts), _merge(dry_parts)


class ForceAccumulator:
    """Per-vessel force/torque sums with a deterministic reduction order."""

    def __init__(self, n_vessels: int):
        self.force = np.zeros((n_vessels, 3))
        self.torque = np.zeros((n_vessels, 3))
        self.n = n_vessels

    def add_rows(self, owner, points, forces, com_positions):
        arms = points - com_positions[owner]
        torque_rows = np.cross(arms, forces)
        for axis in range(3):
            self.force[:, axis] += np.bincount(
                owner, weights=forces[:, axis], minlength=self.n
            )
            self.torque[:, axis] += np.bincount(
                owner, weights=torque_rows[:, axis], minlength=self.n
            )

    def add_central(self, idx: int, force):
        self.force[idx] += force

    def add(self, idx: int, force, point, com):
        self.force[idx] += force
        self.torque[idx] += np.cross(point - com, force)


def hydro_forces(
    sub: TrianglePatch,
    acc: ForceAccumulator,
    com_positions: np.ndarray,
    velocities: np.ndarray,
    omegas: np.ndarray,
    speeds: np.ndarray,
    lengths: np.ndarray,
    cfg: EnvironmentForcesConfig,
) -> None:
    """Buoyancy + pressure drag + friction/current on submerged triangles."""
    if len(sub.areas) == 0:
        return
    own = sub.owner
    rho = cfg.sea_density
    arm = sub.centroids - com_positions[own]
    v_tri = velocities[own] + np.cross(omegas[own], arm)
    v_mag = np.linalg.norm(v_tri, axis=1)
    v_hat = v_tri / np.where(v_mag > 1e-9, v_mag, 1.0)[:, None]
    n_dot_v = np.einsum("ij,ij->i", sub.normals, v_hat)

    re = rho * np.maximum(speeds, 1e-3) * lengths / cfg.dynamic_viscosity
    cd = drag_coefficient(re)[own]
    cf = friction_coefficient(re)[own]

    f_b = (rho * sub.areas * sub.depths * cfg.gravity * sub.normals[:, 1])[:, None] * UP
    f_d = (
        -(rho * sub.areas * n_dot_v * v_mag**cfg.drag_exponent * cd)[:, None]
        * sub.normals
    )
    s_f = (1.0 - n_dot_v) * n_dot_v * cf
    current = cfg.wind_unit * (cfg.current_factor * cfg.u10)
    f_fc = (rho * sub.areas * s_f)[:, None] * (current[None, :] - v_tri)

    acc.add_rows(own, sub.centroids, f_b + f_d + f_fc, com_positions)


def aero_forces(
    dry: TrianglePatch,
    acc: ForceAccumulator,
    com_positions: np.ndarray,
    cfg: EnvironmentForcesConfig,
) -> None:
    """Wind drag on the dry part of the hull."""
    if len(dry.areas) == 0 or cfg.u10 == 0.0:
        return
    w = cfg.wind_unit
    n_dot_w = dry.normals @ w
    f = (-0.5 * cfg.air_density * dry.areas * cfg.u10**2 * n_dot_w)[:, None] * w[None, :]
    acc.add_rows(dry.owner, dry.centroids, f, com_positions)


def propulsion_force(
    action,
    state: VesselState,
    cfg: EnvironmentForcesConfig,
    power_scale: float = 1.0,
    rotation: np.ndarray | None = None,
):
    """Thrust vector at the stern for a normalized (thrust, yaw) command.

    Positive yaw deflects the thrust to port, which pushes the stern to port
    and swings the bow to starboard.
    """
    thrust = float(np.clip(action[0], -1.0, 1.0))
    yaw = float(np.clip(action[1], -1.0, 1.0))
    if thrust == 0.0:
        return np.zeros(3)
    speed = max(state.speed(), cfg.thrust_speed_floor)
    magnitude = thrust * cfg.propulsion_efficiency * state.engine_power * power_scale / speed
    delta = math.radians(yaw * cfg.yaw_max_deg)
    direction_body = np.array([math.cos(delta), 0.0, math.sin(delta)])
    r = state.rotation() if rotation is None else rotation
    return magnitude * (r @ direction_body)


@dataclass
class OrientedBox:
    center: np.ndarray
    axes: np.ndarray       # columns are the box axes in world frame
    half_extents: np.ndarray


def vessel_obb(vessel: Vessel) -> OrientedBox:
    r = vessel.state.rotation()
    lo, hi = vessel.aabb_lo, vessel.aabb_hi
    center_local = 0.5 * (lo + hi)
    return OrientedBox(
        center=vessel.state.position + r @ center_local,
        axes=r,
        half_extents=0.5 * (hi - lo),
    )


def obb_overlap(a: OrientedBox, b: OrientedBox):
    """Separating-axis test; returns (depth, axis a->b) or None.

    Hand-rolled scalar math: this sits on the per-pair hot path.
    """
    ax = [tuple(a.axes[:, i]) for i in range(3)]
    bx = [tuple(b.axes[:, i]) for i in range(3)]
    ae = tuple(a.half_extents)
    be = tuple(b.half_extents)
    tv = tuple(b.center - a.center)

    def dot(u, v):
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]

    def cross(u, v):
        return (
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        )

    axes = list(ax) + list(bx)
    for u in ax:
        for v in bx:
            c = cross(u, v)
            n2 = dot(c, c)
            if n2 > 1e-12:
                inv = 1.0 / math.sqrt(n2)
                axes.append((c[0] * inv, c[1] * inv, c[2] * inv))

    best_depth = math.inf
    best_axis = None
    for axis in axes:
        ra = ae[0] * abs(dot(axis, ax[0])) + ae[1] * abs(dot(axis, ax[1])) + ae[2] * abs(dot(axis, ax[2]))
        rb = be[0] * abs(dot(axis, bx[0])) + be[1] * abs(dot(axis, bx[1])) + be[2] * abs(dot(axis, bx[2]))
        proj = dot(axis, tv)
        overlap = ra + rb - abs(proj)
        if overlap <= 0.0:
            return None
        if overlap < best_depth:
            best_depth = overlap
            best_axis = axis if proj >= 0.0 else (-axis[0], -axis[1], -axis[2])
    return best_depth, np.array(best_axis)


@dataclass
class StepInfo:
    collision_terrain: np.ndarray
    collision_vessel: np.ndarray
    wall_contact: np.ndarray

    @property
    def collision(self) -> np.ndarray:
        return self.collision_terrain | self.collision_vessel


def step_vessels(
    vessels: list[Vessel],
    actions,
    ocean: OceanField | None,
    terrain_field,
    dt: float,
    cfg: EnvironmentForcesConfig,
    enclosures: list[tuple[float, float, float, float]] | None = None,
    contact_pairs: list[tuple[int, int]] | None = None,
    disable_forces: bool = False,
    use_fastpath: bool = True,
) -> StepInfo:
    """Advance every vessel by one fixed timestep.

    ``enclosures[i]`` is an (xmin, xmax, zmin, zmax) wall box per vessel (or
    None); ``contact_pairs`` restricts vessel-vessel contact tests (defaults
    to all pairs); ``disable_forces`` integrates a pure free drift.  Raises
    :class:`SimulationNaNError` if any state goes non-finite.
    """
    n = len(vessels)
    actions = np.asarray(actions, dtype=float).reshape(n, 2)
    acc = ForceAccumulator(n)

    if disable_forces:
        for i, vessel in enumerate(vessels):
            state = vessel.state
            state.position = state.position + state.linear_velocity * dt
            state.orientation = quat_integrate(
                state.orientation, state.angular_velocity, dt
            )
            state.orientation = quat_normalize(state.orientation)
        return StepInfo(
            collision_terrain=np.zeros(n, dtype=bool),
            collision_vessel=np.zeros(n, dtype=bool),
            wall_contact=np.zeros(n, dtype=bool),
        )

    positions = np.stack([v.state.position for v in vessels])
    velocities = np.stack([v.state.linear_velocity for v in vessels])
    omegas = np.stack([v.state.angular_velocity for v in vessels])
    quats = np.stack([v.state.orientation for v in vessels])
    speeds = np.linalg.norm(velocities, axis=1)
    lengths = np.array([v.state.axial_length for v in vessels])
    rotations = quats_to_matrices(quats)

    # hull triangles, all vessels flattened into one batch
    same_mesh = all(v.mesh is vessels[0].mesh for v in vessels)
    if not same_mesh:
        raise NotImplementedError("mixed hull meshes in one step batch")
    base = vessels[0]
    local = base.vertices_local                          # (V, 3)
    tri = base.triangles                                 # (T, 3)
    n_vert = len(local)
    n_tri = len(tri)

    world_verts_cache: list[np.ndarray | None] = [None] * n

    def vessel_world_vertices(i: int) -> np.ndarray:
        if world_verts_cache[i] is None:
            world_verts_cache[i] = positions[i] + local @ rotations[i].T
        return world_verts_cache[i]

    if use_fastpath and fastpath.HAVE_NUMBA:
        re = cfg.sea_density * np.maximum(speeds, 1e-3) * lengths / cfg.dynamic_viscosity
        wind = cfg.wind_unit
        if ocean is not None:
            height_grid = ocean.height
            cell = ocean.patch_size / ocean.n
        else:
            height_grid = _FLAT_GRID
            cell = -1.0
        fastpath.hull_forces_kernel(
            local,
            tri,
            base.tri_areas_local,
            base.tri_normals_local,
            base.tri_centroids_local,
            rotations,
            positions,
            velocities,
            omegas,
            drag_coefficient(re),
            friction_coefficient(re),
            height_grid,
            cell,
            cfg.sea_density,
            cfg.gravity,
            cfg.drag_exponent,
            cfg.air_density,
            cfg.u10,
            wind,
            wind * (cfg.current_factor * cfg.u10),
            acc.force,
            acc.torque,
        )
    else:
        # reference numpy path: rigid body-frame geometry is rotated rather
        # than recomputed; only waterline-crossing triangles gather corners
        world_verts = (
            np.einsum("nij,vj->nvi", rotations, local) + positions[:, None, :]
        )
        for i in range(n):
            world_verts_cache[i] = world_verts[i]
        flat_verts = world_verts.reshape(-1, 3)
        if ocean is not None:
            surf = sample_surface(ocean, flat_verts[:, 0], flat_verts[:, 2])
            elev_verts = (flat_verts[:, 1] - surf).reshape(n, n_vert)
        else:
            elev_verts = world_verts[:, :, 1]

        elevations = elev_verts[:, tri].reshape(-1, 3)   # (n*T, 3)
        owners = np.repeat(np.arange(n, dtype=np.int64), n_tri)
        normals = np.einsum(
            "nij,tj->nti", rotations, base.tri_normals_local
        ).reshape(-1, 3)
        centroids = (
            np.einsum("nij,tj->nti", rotations, base.tri_centroids_local)
            + positions[:, None, :]
        ).reshape(-1, 3)
        areas = np.tile(base.tri_areas_local, n)

        below = elevations <= 0.0
        code = below[:, 0] * 4 + below[:, 1] * 2 + below[:, 2] * 1
        full_sub = code == 7
        full_dry = code == 0
        mixed_idx = np.nonzero(~(full_sub | full_dry))[0]

        sub_parts = [
            TrianglePatch(
                areas[full_sub],
                centroids[full_sub],
                normals[full_sub],
                elevations[full_sub].mean(axis=1),
                owners[full_sub],
            )
        ]
        dry_parts = [
            TrianglePatch(
                areas[full_dry],
                centroids[full_dry],
                normals[full_dry],
                elevations[full_dry].mean(axis=1),
                owners[full_dry],
            )
        ]
        if len(mixed_idx):
            corner_ids = (
                owners[mixed_idx, None] * n_vert + tri[mixed_idx % n_tri]
            )                                            # (m, 3) flat vertex ids
            m_corners = flat_verts[corner_ids]           # (m, 3, 3)
            apex, quad1, quad2, a_below = _clip_mixed(
                m_corners,
                elevations[mixed_idx],
                normals[mixed_idx],
                owners[mixed_idx],
                code[mixed_idx],
            )
            sub_parts += [
                _select(apex, a_below),
                _select(quad1, ~a_below),
                _select(quad2, ~a_below),
            ]
            dry_parts += [
                _select(apex, ~a_below),
                _select(quad1, a_below),
                _select(quad2, a_below),
            ]
        sub = _merge(sub_parts)
        dry = _merge(dry_parts)

        hydro_forces(sub, acc, positions, velocities, omegas, speeds, lengths, cfg)
        aero_forces(dry, acc, positions, cfg)

    # gravity, batched
    acc.force[:, 1] -= np.array([v.state.mass for v in vessels]) * cfg.gravity

    info = StepInfo(
        collision_terrain=np.zeros(n, dtype=bool),
        collision_vessel=np.zeros(n, dtype=bool),
        wall_contact=np.zeros(n, dtype=bool),
    )

    for i, vessel in enumerate(vessels):
        state = vessel.state
        thrust = propulsion_force(actions[i], state, cfg, vessel.power_scale, rotations[i])
        if thrust.any():
            stern_world = state.position + rotations[i] @ vessel.stern_local
            acc.add(i, thrust, stern_world, state.position)

        if terrain_field is None and (enclosures is None or enclosures[i] is None):
            continue
        wv = vessel_world_vertices(i)
        # terrain penetration: stiff penalty along the local surface normal.
        # The configured stiffness/damping is the whole contact's, so it is
        # shared across penetrating vertices to stay stable at any count.
        if terrain_field is not None:
            ground = terrain_mod.height_at(terrain_field, wv[:, 0], wv[:, 2])
            pen = ground - wv[:, 1]
            hits = np.nonzero(pen > 0.0)[0]
            if len(hits) > 0:
                info.collision_terrain[i] = True
                share = 1.0 / len(hits)
                for vi in hits:
                    p = wv[vi]
                    nrm = terrain_mod.surface_normal(terrain_field, p[0], p[2])
                    v_pt = state.linear_velocity + np.cross(
                        state.angular_velocity, p - state.position
                    )
                    mag = share * (
                        cfg.contact_stiffness * pen[vi]
                        - cfg.contact_damping * float(v_pt @ nrm)
                    )
                    if mag > 0.0:
                        acc.add(i, mag * nrm, p, state.position)

        # enclosure walls: same penalty model, pushes the hull back inside
        if enclosures is not None and enclosures[i] is not None:
            xmin, xmax, zmin, zmax = enclosures[i]
            for axis, bound, sign in (
                (0, xmin, 1.0),
                (0, xmax, -1.0),
                (2, zmin, 1.0),
                (2, zmax, -1.0),
            ):
                pen = sign * (bound - wv[:, axis])
                hits = np.nonzero(pen > 0.0)[0]
                if len(hits) == 0:
                    continue
                info.wall_contact[i] = True
                normal = np.zeros(3)
                normal[axis] = sign
                share = 1.0 / len(hits)
                for vi in hits:
                    p = wv[vi]
                    v_pt = state.linear_velocity + np.cross(
                        state.angular_velocity, p - state.position
                    )
                    mag = share * (
                        cfg.contact_stiffness * pen[vi]
                        - cfg.contact_damping * float(v_pt @ normal)
                    )
                    if mag > 0.0:
                        acc.add(i, mag * normal, p, state.position)

    # vessel-vessel contacts: sphere broad-phase, then exact SAT
    if n > 1:
        if contact_pairs is None:
            contact_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        radii = np.array([v.bounding_radius for v in vessels])
        pair_arr = np.asarray(contact_pairs, dtype=np.int64)
        if len(pair_arr):
            deltas = positions[pair_arr[:, 0]] - positions[pair_arr[:, 1]]
            close = np.einsum("ij,ij->i", deltas, deltas) <= (
                radii[pair_arr[:, 0]] + radii[pair_arr[:, 1]]
            ) ** 2
            contact_pairs = [tuple(p) for p in pair_arr[close]]
        boxes = {}
        for i, j in contact_pairs:
            if i not in boxes:
                boxes[i] = vessel_obb(vessels[i])
            if j not in boxes:
                boxes[j] = vessel_obb(vessels[j])
            hit = obb_overlap(boxes[i], boxes[j])
            if hit is None:
                continue
            depth, axis = hit
            info.collision_vessel[i] = True
            info.collision_vessel[j] = True
            rel_v = float((vessels[j].state.linear_velocity - vessels[i].state.linear_velocity) @ axis)
            mag = cfg.contact_stiffness * depth - cfg.contact_damping * rel_v
            if mag > 0.0:
                acc.add_central(j, mag * axis)
                acc.add_central(i, -mag * axis)

    # semi-implicit Euler: velocities first, then pose.  The gyroscopic
    # torque is omitted (game-physics convention): integrating it explicitly
    # is unstable at the spin rates aggressive policies can command.
    masses = np.array([v.state.mass for v in vessels])
    inertias = np.stack([v.state.inertia for v in vessels])
    inertia_world = np.einsum("nij,njk,nlk->nil", rotations, inertias, rotations)
    lin_acc = acc.force / masses[:, None]
    ang_acc = np.linalg.solve(inertia_world, acc.torque[:, :, None])[:, :, 0]

    new_lin = (velocities + lin_acc * dt) / (1.0 + cfg.linear_damping * dt)
    new_ang = (omegas + ang_acc * dt) / (1.0 + cfg.angular_damping * dt)
    new_pos = positions + new_lin * dt

    for i, vessel in enumerate(vessels):
        state = vessel.state
        state.linear_velocity = new_lin[i]
        state.angular_velocity = new_ang[i]
        state.position = new_pos[i]
        state.orientation = quat_integrate(state.orientation, new_ang[i], dt)

        if not (
            np.all(np.isfinite(state.position))
            and np.all(np.isfinite(state.linear_velocity))
            and np.all(np.isfinite(state.angular_velocity))
            and np.all(np.isfinite(state.orientation))
        ):
            raise SimulationNaNError(
                f"vessel {i} state went non-finite (pos={state.position}, "
                f"vel={state.linear_velocity})"
            )
        state.orientation = quat_normalize(state.orientation)

    return info


def kinetic_energy(state: VesselState) -> float:
    r = state.rotation()
    inertia_world = r @ state.inertia @ r.T
    lin = 0.5 * state.mass * float(state.linear_velocity @ state.linear_velocity)
    ang = 0.5 * float(state.angular_velocity @ (inertia_world @ state.angular_velocity))
    return lin + ang


def buoyant_force_flat(vessel: Vessel, cfg: EnvironmentForcesConfig) -> np.ndarray:
    """Net hydrostatic force under a flat sea at the current pose."""
    wv = vessel.world_vertices()
    tri = vessel.triangles
    c = wv[tri]
    e = wv[:, 1][tri]
    cross = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    nrm = np.linalg.norm(cross, axis=1)
    normals = cross / np.where(nrm > 0.0, nrm, 1.0)[:, None]
    owner = np.zeros(len(tri), dtype=np.int64)
    sub, _ = split_at_waterline(c, e, normals, owner)
    f_y = cfg.sea_density * sub.areas * sub.depths * cfg.gravity * sub.normals[:, 1]
    return np.array([0.0, float(np.sum(f_y)), 0.0])


def settle_to_draft(vessel: Vessel, cfg: EnvironmentForcesConfig, tol: float = 1e-6) -> float:
    """Move the vessel vertically to hydrostatic equilibrium on a flat sea.

    Returns the equilibrium CoM height.  Bisection on the net vertical force.
    """
    weight = vessel.state.mass * cfg.gravity
    size = float(vessel.aabb_hi[1] - vessel.aabb_lo[1])
    lo = -2.0 * size
    hi = 2.0 * size

    def net(y):
        vessel.state.position[1] = y
        return float(buoyant_force_flat(vessel, cfg)[1]) - weight

    if net(lo) < 0.0:
        raise ValueError("vessel denser than water: no floating equilibrium")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if net(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    vessel.state.position[1] = 0.5 * (lo + hi)
    return float(vessel.state.position[1])
