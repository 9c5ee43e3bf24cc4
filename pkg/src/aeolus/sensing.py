"""Rangefinder-style perception: sonar rays, a sweeping radar, and the
fixed-layout observation vector fed to the policy.

Sonar casts a ring of slightly down-pitched rays against terrain and
enclosure walls.  The radar is a rotating sector that (re)detects vessels as
it sweeps past their bearing, caching range, bearing and the target's
velocity decomposed into incoming and orbital components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import terrain as terrain_mod
from .dynamics import VesselState
from .geometry import bearing_to_direction, signed_horizontal_angle, wrap_deg

N_RAYS = 50
RAY_STEP_DEG = 360.0 / N_RAYS            # 7.2 degrees
SONAR_RANGE = 150.0
SONAR_PITCH_DEG = -4.0
RADAR_RANGE = 500.0
RADAR_RPM = 60.0
K_CONTACTS = 4

# positive orbital speed = target circles the sensor anti-clockwise seen from
# above (toward the port side and astern); flip here if the convention ever
# needs to change
ORBIT_SIGN = 1.0


@dataclass
class SonarReturn:
    ray_angle_deg: float      # signed bearing off the bow, starboard positive
    hit: bool
    fraction: float           # hit distance / range, 1.0 when no hit

    def __post_init__(self):
        if not self.hit:
            assert self.fraction == 1.0


@dataclass
class RadarContact:
    distance: float           # normalized by the episode-start waypoint distance
    bearing: float            # signed degrees / 180
    incoming_speed: float     # toward the sensor, normalized by max speed
    orbital_speed: float      # anti-clockwise tangential, normalized
    staleness: int = 0        # steps since the sweep last painted it


@dataclass
class RadarState:
    sweep_deg: float = 0.0
    contacts: dict[int, RadarContact] = field(default_factory=dict)


@dataclass
class ObservationConfig:
    n_rays: int = N_RAYS
    sonar_range: float = SONAR_RANGE
    sonar_pitch_deg: float = SONAR_PITCH_DEG
    radar_range: float = RADAR_RANGE
    radar_rpm: float = RADAR_RPM
    k_contacts: int = K_CONTACTS

    @property
    def width(self) -> int:
        return 1 + 2 + 2 * self.n_rays + 4 * self.k_contacts

    def layout(self) -> list[str]:
        names = ["collision", "heading_error", "waypoint_distance"]
        for i in range(self.n_rays):
            angle = wrap_deg(i * 360.0 / self.n_rays)
            names.append(f"sonar_hit[{angle:+.1f}deg]")
            names.append(f"sonar_fraction[{angle:+.1f}deg]")
        for k in range(self.k_contacts):
            names += [
                f"contact{k}_distance",
                f"contact{k}_bearing",
                f"contact{k}_incoming",
                f"contact{k}_orbital",
            ]
        return names


def _ray_directions_body(cfg: ObservationConfig) -> np.ndarray:
    azimuths = np.arange(cfg.n_rays) * (360.0 / cfg.n_rays)
    pitch = math.radians(cfg.sonar_pitch_deg)
    az = np.radians(azimuths)
    return np.stack(
        [
            np.cos(pitch) * np.cos(az),
            np.full(cfg.n_rays, math.sin(pitch)),
            -np.cos(pitch) * np.sin(az),
        ],
        axis=1,
    )


def _wall_hit_distances(origin, dirs, bounds, max_range):
    """First crossing of the enclosure boundary planes along each ray."""
    xmin, xmax, zmin, zmax = bounds
    best = np.full(len(dirs), np.inf)
    for axis, bound in ((0, xmin), (0, xmax), (2, zmin), (2, zmax)):
        d = dirs[:, axis]
        mask = np.abs(d) > 1e-12
        t = np.where(mask, (bound - origin[axis]) / np.where(mask, d, 1.0), np.inf)
        t = np.where((t > 0.0) & (t <= max_range), t, np.inf)
        best = np.minimum(best, t)
    return best


def _terrain_hit_distances(origin, dirs, fld, max_range, coarse=1.0, fine=0.1):
    """Ray-march the heightfield, then bisect the crossing to ``fine``."""
    n_rays = len(dirs)
    hit_t = np.full(n_rays, np.inf)
    active = np.ones(n_rays, dtype=bool)
    t = coarse
    prev_t = np.zeros(n_rays)
    while t <= max_range and active.any():
        pts = origin[None, :] + t * dirs[active]
        ground = terrain_mod.height_at(fld, pts[:, 0], pts[:, 2])
        below = pts[:, 1] <= ground
        idx = np.nonzero(active)[0]
        crossed = idx[below]
        if len(crossed):
            # bisect between prev_t and t per crossed ray
            lo = prev_t[crossed].copy()
            hi = np.full(len(crossed), t)
            for _ in range(int(math.ceil(math.log2(coarse / fine)))):
                mid = 0.5 * (lo + hi)
                pts_m = origin[None, :] + mid[:, None] * dirs[crossed]
                g_m = terrain_mod.height_at(fld, pts_m[:, 0], pts_m[:, 2])
                below_m = pts_m[:, 1] <= g_m
                hi = np.where(below_m, mid, hi)
                lo = np.where(below_m, lo, mid)
            hit_t[crossed] = 0.5 * (lo + hi)
            active[crossed] = False
        prev_t[active] = t
        t += coarse
    return hit_t


def sonar_scan(
    state: VesselState,
    terrain_field: terrain_mod.TerrainField | None,
    enclosure: tuple[float, float, float, float] | None,
    cfg: ObservationConfig | None = None,
) -> list[SonarReturn]:
    """Ring of range returns against terrain and enclosure walls."""
    cfg = cfg or ObservationConfig()
    r = state.rotation()
    dirs = _ray_directions_body(cfg) @ r.T
    origin = state.position

    dist = np.full(cfg.n_rays, np.inf)
    if enclosure is not None:
        dist = np.minimum(dist, _wall_hit_distances(origin, dirs, enclosure, cfg.sonar_range))
    if terrain_field is not None:
        dist = np.minimum(
            dist, _terrain_hit_distances(origin, dirs, terrain_field, cfg.sonar_range)
        )

    out = []
    for i in range(cfg.n_rays):
        angle = wrap_deg(i * 360.0 / cfg.n_rays)
        if np.isfinite(dist[i]) and dist[i] <= cfg.sonar_range:
            out.append(SonarReturn(angle, True, float(dist[i] / cfg.sonar_range)))
        else:
            out.append(SonarReturn(angle, False, 1.0))
    return out


def radar_sweep_step(
    state: VesselState,
    radar: RadarState,
    others: list[tuple[int, VesselState]],
    waypoint_distance_start: float,
    dt: float,
    cfg: ObservationConfig | None = None,
) -> RadarState:
    """Advance the sweep one tick and refresh contacts it painted.

    ``others`` carries (vessel_id, state) for every candidate target; the
    sector swept this step re-detects any of them whose bearing it crosses
    within range.  Contacts that drift beyond range are dropped, everything
    else ages by one step.
    """
    cfg = cfg or ObservationConfig()
    advance = 360.0 * (cfg.radar_rpm / 60.0) * dt
    lo = radar.sweep_deg
    hi = lo + advance

    fwd = state.rotation()[:, 0]
    for contact in radar.contacts.values():
        contact.staleness += 1

    for vid, other in others:
        rel = other.position - state.position
        rng = float(np.hypot(rel[0], rel[2]))
        if rng > cfg.radar_range:
            radar.contacts.pop(vid, None)
            continue
        bearing = signed_horizontal_angle(fwd, rel)
        bearing_pos = bearing % 360.0
        # does [lo, hi) cross this bearing (mod 360)?
        offset = (bearing_pos - lo) % 360.0
        if offset < advance:
            r_hat = np.array([rel[0], 0.0, rel[2]])
            r_hat /= max(np.linalg.norm(r_hat), 1e-9)
            t_hat = ORBIT_SIGN * np.cross(r_hat, np.array([0.0, 1.0, 0.0]))
            vel = other.linear_velocity
            radar.contacts[vid] = RadarContact(
                distance=rng / max(waypoint_distance_start, 1e-9),
                bearing=bearing / 180.0,
                incoming_speed=float(-(vel @ r_hat)) / state.max_speed,
                orbital_speed=float(vel @ t_hat) / state.max_speed,
                staleness=0,
            )

    radar.sweep_deg = (radar.sweep_deg + advance) % 360.0
    return radar


def waypoint_features(
    state: VesselState, waypoint: np.ndarray, waypoint_distance_start: float
) -> tuple[float, float]:
    """Normalized heading error (starboard positive) and clamped distance ratio."""
    if waypoint_distance_start <= 0.0:
        raise ValueError("episode-start waypoint distance must be positive")
    rel = waypoint - state.position
    beta = signed_horizontal_angle(state.rotation()[:, 0], rel) / 180.0
    d = float(np.hypot(rel[0], rel[2]))
    d_norm = min(max(d / waypoint_distance_start, 0.0), 1.0)
    return beta, d_norm


def nearest_contacts(radar: RadarState, k: int) -> list[RadarContact]:
    ordered = sorted(radar.contacts.values(), key=lambda c: c.distance)
    return ordered[:k]


def assemble_observation(
    collision: bool,
    beta: float,
    waypoint_distance: float,
    sonar: list[SonarReturn],
    radar: RadarState,
    cfg: ObservationConfig | None = None,
) -> np.ndarray:
    """Fixed-layout observation: [collision, waypoint, sonar pairs, contact
    slots].  Contact slots fill nearest first and pad with a far, silent
    target."""
    cfg = cfg or ObservationConfig()
    obs = np.empty(cfg.width)
    obs[0] = 1.0 if collision else 0.0
    obs[1] = beta
    obs[2] = waypoint_distance
    base = 3
    for i, ray in enumerate(sonar):
        obs[base + 2 * i] = 1.0 if ray.hit else 0.0
        obs[base + 2 * i + 1] = ray.fraction
    base += 2 * cfg.n_rays
    contacts = nearest_contacts(radar, cfg.k_contacts)
    for k in range(cfg.k_contacts):
        if k < len(contacts):
            c = contacts[k]
            obs[base + 4 * k : base + 4 * k + 4] = (
                c.distance,
                c.bearing,
                c.incoming_speed,
                c.orbital_speed,
            )
        else:
            obs[base + 4 * k : base + 4 * k + 4] = (1.0, 0.0, 0.0, 0.0)
    return obs
