"""Per-step and terminal reward signals.

The step reward combines waypoint progress, grounding avoidance, vessel
avoidance with a starboard-weighted bearing emphasis, and a small time
penalty.  A collision-time weighting factor trades navigation reward against
avoidance reward as closing targets get near.  All bearing-shaped factors
take their arguments in degrees; every exponent is clamped so any finite
observation yields a finite reward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import VesselState
from .geometry import bearing_to_direction
from .sensing import ObservationConfig, RadarContact, SonarReturn

EXP_CLAMP = 50.0


def _exp(x: float) -> float:
    return math.exp(min(max(x, -EXP_CLAMP), EXP_CLAMP))


def shaped_sigmoid(x: float, s1: float, s2: float, s3: float) -> float:
    """s1 / (1 + e^(-s2 (x + s3))), argument clamped against overflow."""
    return s1 / (1.0 + _exp(-s2 * (x + s3)))


def clamp(x: float, lo: float = 1e-3, hi: float = 1e3) -> float:
    return min(max(x, lo), hi)


class DoneReason(Enum):
    NONE = "none"
    WAYPOINT = "waypoint"
    COLLISION_TIMEOUT = "collision_timeout"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class RewardConfig:
    reward_scale: float = 0.1          # r_r
    penalty_scale: float = 0.05        # p_r
    safety_time: float = 20.0          # seconds of warning before trade-off
    collision_reward: float = -0.25    # per step while in contact
    collision_timeout_reward: float = -3.0
    waypoint_reward: float = 3.0
    waypoint_radius: float = 15.0
    collision_timeout_steps: int = 1500
    env_size: float = 500.0            # s_e
    dt: float = 0.02
    max_speed: float = 25.0            # v_max
    speed_margin: float = 5.0          # U_up, about max_speed / 5
    sonar_range: float = 150.0

    @property
    def max_episode_steps(self) -> int:
        # ten environment crossings at top speed
        return int(round(10.0 * self.env_size / (self.dt * self.max_speed)))

    @property
    def time_penalty(self) -> float:
        return -1.0 / self.max_episode_steps

    @property
    def velocity_factor(self) -> float:
        # constant for a given rig; discourages running at the speed ceiling
        return 0.2 / (1.0 + _exp(-(self.max_speed - self.speed_margin)))


@dataclass
class RewardBreakdown:
    nav: float = 0.0
    static: float = 0.0
    dynamic: float = 0.0
    time: float = 0.0
    omega: float = 1.0
    total: float = 0.0
    terminal: float = 0.0
    done: bool = False
    done_reason: DoneReason = DoneReason.NONE

    def as_dict(self) -> dict:
        return {
            "nav": self.nav,
            "static": self.static,
            "dynamic": self.dynamic,
            "time": self.time,
            "omega": self.omega,
            "total": self.total,
            "terminal": self.terminal,
            "done": self.done,
            "done_reason": self.done_reason.value,
        }


def tradeoff_omega(
    contacts: list[RadarContact],
    state: VesselState,
    cfg: RewardConfig,
    waypoint_distance_start: float,
) -> float:
    """Collision-time weighting in [0, 1]; 1 with nothing inbound.

    Per contact the time to collision divides the de-normalized range by the
    closing speed (own speed toward the target plus the target's incoming
    speed), clamped positive.
    """
    if not contacts:
        return 1.0
    omega = 1.0
    r = state.rotation()
    for c in contacts:
        d_m = c.distance * waypoint_distance_start
        ray = r @ bearing_to_direction(c.bearing * 180.0)
        own_toward = float(state.linear_velocity @ ray)
        closing = clamp(own_toward + c.incoming_speed * state.max_speed, 1e-3, math.inf)
        t_c = d_m / closing
        omega = min(omega, 1.0 / (1.0 + _exp(-0.5 * (t_c - cfg.safety_time))))
    return omega


def nav_reward(
    state: VesselState,
    waypoint: np.ndarray,
    omega: float,
    cfg: RewardConfig,
) -> float:
    """Progress-towards-waypoint reward (case D forced negative)."""
    rel = waypoint - state.position
    rel[1] = 0.0
    norm = np.linalg.norm(rel)
    if norm < 1e-9:
        return 0.0
    x_wp = rel / norm
    u_hat = float(state.linear_velocity @ x_wp)
    fwd = state.rotation()[:, 0]
    fwd_h = np.array([fwd[0], 0.0, fwd[2]])
    fwd_h /= max(np.linalg.norm(fwd_h), 1e-9)
    h_hat = float(fwd_h @ x_wp)
    product = u_hat * h_hat
    if u_hat < 0.0 and h_hat < 0.0:
        product = -product  # backing away while facing away still penalizes
    return cfg.reward_scale * cfg.velocity_factor * omega * product


def heading_weight(theta_ray_deg: float) -> float:
    """Grounding-threat weight by ray bearing: 1 ahead, 0 abeam, 0.5 astern."""
    x = theta_ray_deg
    return (
        1.0
        + 2.0 / (1.0 + _exp(0.5 * abs(x)))
        - 1.0 / (1.0 + _exp(-x - 180.0))
        + 1.0 / (1.0 + _exp(180.0 - x))
    )


def static_reward(
    sonar: list[SonarReturn],
    state: VesselState,
    cfg: RewardConfig,
) -> float:
    """Grounding-avoidance penalty, 0 with no sonar hits, else <= 0."""
    speed = state.speed()
    num = 0.0
    den = 0.0
    for ray in sonar:
        if not ray.hit:
            continue
        ray_len = ray.fraction * cfg.sonar_range
        u_land = clamp(speed * math.cos(math.radians(ray.ray_angle_deg)))
        t_land = ray_len / u_land
        r_ray = cfg.penalty_scale * u_land * _exp(-t_land / u_land)
        w = heading_weight(ray.ray_angle_deg)
        num += w * r_ray
        den += w
    if den == 0.0:
        return 0.0
    return -num / max(den, 1e-6)


def colreg_weight(bearing_deg: float) -> float:
    """Bearing emphasis for avoidance: head-on targets weigh most, the
    starboard quarter more than port."""
    x = bearing_deg
    return (
        1.0
        - shaped_sigmoid(x, 1.0, 0.25, -112.5)
        + shaped_sigmoid(x, 1.75, 0.25, 5.0)
        - shaped_sigmoid(x, 0.75, 1.0, -112.5)
    )


def colreg_weight_distance(bearing_deg: float) -> float:
    x = bearing_deg
    return (
        1.0
        - shaped_sigmoid(x, 1.0, 0.25, 112.5)
        + shaped_sigmoid(x, 3.0, 1.0, 5.0)
        - shaped_sigmoid(x, 2.0, 1.0, -5.0)
    )


def colreg_weight_orbital(bearing_deg: float) -> float:
    x = bearing_deg
    return shaped_sigmoid(x, 1.0, 0.25, 112.5) - shaped_sigmoid(x, 1.0, 0.25, 5.0)


def dynamic_reward(
    contacts: list[RadarContact],
    state: VesselState,
    omega: float,
    cfg: RewardConfig,
) -> float:
    """Vessel-avoidance reward; 0 with no contacts.

    Each contact contributes a bearing-weighted proximity penalty plus an
    orbital term that pays for targets streaming anti-clockwise (port side
    to stern) around the sensor.
    """
    if not contacts:
        return 0.0
    speed = state.speed()
    total = 0.0
    for c in contacts:
        x = c.bearing * 180.0
        h_c = colreg_weight(x)

        u_psi = clamp(
            speed * math.cos(math.radians(x)) + c.incoming_speed * state.max_speed
        )
        h_crd = max(colreg_weight_distance(x), 1e-9)
        r_d = (
            (1.0 - omega)
            * cfg.penalty_scale
            * u_psi
            * _exp(-(0.5 * c.distance) / (u_psi * h_crd))
        )

        v_o = clamp(c.orbital_speed)
        h_cro = colreg_weight_orbital(x)
        r_o = cfg.reward_scale * v_o * h_cro * _exp(-(0.15 * c.distance) / v_o) - (
            2.0 * v_o / (v_o + _exp((0.25 * c.distance) / v_o))
        )

        total += -(h_c * r_d) + r_o
    return total


def step_reward(
    nav: float,
    static: float,
    dynamic: float,
    omega: float,
    collision: bool,
    cfg: RewardConfig,
) -> RewardBreakdown:
    """Combine the per-step components; contact overrides them all."""
    time_pen = cfg.time_penalty
    if collision:
        total = cfg.collision_reward
    else:
        total = nav + static + dynamic + time_pen
    return RewardBreakdown(
        nav=nav,
        static=static,
        dynamic=dynamic,
        time=time_pen,
        omega=omega,
        total=total,
    )


def terminal_check(
    state: VesselState,
    waypoint: np.ndarray,
    step_count: int,
    collision_steps: int,
    cfg: RewardConfig,
) -> tuple[bool, DoneReason, float]:
    """Episode end test: waypoint radius, collision timeout, or time limit."""
    rel = waypoint - state.position
    if float(np.hypot(rel[0], rel[2])) < cfg.waypoint_radius:
        return True, DoneReason.WAYPOINT, cfg.waypoint_reward
    if collision_steps >= cfg.collision_timeout_steps:
        return True, DoneReason.COLLISION_TIMEOUT, cfg.collision_timeout_reward
    if step_count >= cfg.max_episode_steps:
        return True, DoneReason.TIME_LIMIT, 0.0
    return False, DoneReason.NONE, 0.0
