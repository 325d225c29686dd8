"""Planar 4-DoF arm pushing a puck around a [-1, 1]^2 arena.

The 8-gene genotype holds two joint configurations (angles in [-pi, pi]).
Phase 1 (5 s): the arm interpolates linearly in joint space from the zero
configuration to the first; the puck then spawns at the arena centre.
Phase 2 (5 s): the arm interpolates to the second configuration and may
push the puck, which bounces off the walls with restitution and decays
exponentially. Sensory data is the puck position sampled every 0.1 s of
phase 2 (50 points, flattened); the hand-coded descriptor is the final
puck position, bit-identical to the last sample. Fitness penalises energy,
-sum(|joint velocities|^2) over both phases.

Contact model is kinematic: on segment/disc penetration the puck velocity
is set to the contact point's velocity projected on the contact normal
(floored at zero outward) and the puck is pushed out along the normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from ..core import Genotype

GENOTYPE_LENGTH = 8
ANGLE_BOUND = math.pi
LINK_LENGTH = 0.5
N_LINKS = 4
BASE = (0.0, -1.0)
ARENA_HALF = 1.0
PUCK_START = (0.0, 0.0)
PUCK_RADIUS = 0.08
RESTITUTION = 0.9
DAMPING = 0.98
DT = 0.01
PHASE_STEPS = 500  # 5 seconds per phase
SAMPLE_EVERY = 10  # 0.1 s
N_SAMPLES = PHASE_STEPS // SAMPLE_EVERY
SENSORY_DIM = 2 * N_SAMPLES


@dataclass
class PuckState:
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0


@nb.njit(cache=True)
def _fk_kernel(angles, base_x, base_y, link):
    pts = np.empty((N_LINKS + 1, 2))
    pts[0, 0] = base_x
    pts[0, 1] = base_y
    theta = 0.0
    for i in range(N_LINKS):
        theta += angles[i]
        pts[i + 1, 0] = pts[i, 0] + link * math.cos(theta)
        pts[i + 1, 1] = pts[i, 1] + link * math.sin(theta)
    return pts


@nb.njit(cache=True)
def _puck_step_kernel(
    px, py, vx, vy, pts_prev, pts_cur, dt, puck_r, restitution, damping, arena_half
):
    """One puck step against the arm segments defined by joint positions."""
    # deepest penetrating segment of the current arm
    deepest = -1
    best_depth = 0.0
    best_s = 0.0
    best_cx = 0.0
    best_cy = 0.0
    for k in range(pts_cur.shape[0] - 1):
        ax = pts_cur[k, 0]
        ay = pts_cur[k, 1]
        bx = pts_cur[k + 1, 0]
        by = pts_cur[k + 1, 1]
        dx = bx - ax
        dy = by - ay
        length2 = dx * dx + dy * dy
        if length2 == 0.0:
            s = 0.0
        else:
            s = ((px - ax) * dx + (py - ay) * dy) / length2
            if s < 0.0:
                s = 0.0
            elif s > 1.0:
                s = 1.0
        cx = ax + s * dx
        cy = ay + s * dy
        depth = puck_r - math.hypot(px - cx, py - cy)
        if depth > best_depth:
            best_depth = depth
            deepest = k
            best_s = s
            best_cx = cx
            best_cy = cy
    if deepest >= 0:
        nx = px - best_cx
        ny = py - best_cy
        nlen = math.hypot(nx, ny)
        if nlen < 1e-12:
            # puck centre on the segment: use the segment's left normal
            sx = pts_cur[deepest + 1, 0] - pts_cur[deepest, 0]
            sy = pts_cur[deepest + 1, 1] - pts_cur[deepest, 1]
            slen = math.hypot(sx, sy)
            if slen == 0.0:
                nx, ny = 0.0, 1.0
            else:
                nx, ny = -sy / slen, sx / slen
        else:
            nx /= nlen
            ny /= nlen
        cpx = pts_prev[deepest, 0] + best_s * (pts_prev[deepest + 1, 0] - pts_prev[deepest, 0])
        cpy = pts_prev[deepest, 1] + best_s * (pts_prev[deepest + 1, 1] - pts_prev[deepest, 1])
        vcx = (best_cx - cpx) / dt
        vcy = (best_cy - cpy) / dt
        vn = vcx * nx + vcy * ny
        if vn < 0.0:
            vn = 0.0
        vx = vn * nx
        vy = vn * ny
        px += nx * best_depth
        py += ny * best_depth
    # integrate
    px += vx * dt
    py += vy * dt
    # wall bounces
    lim = arena_half - puck_r
    if px > lim:
        px = 2.0 * lim - px
        vx = -restitution * vx
    elif px < -lim:
        px = -2.0 * lim - px
        vx = -restitution * vx
    if py > lim:
        py = 2.0 * lim - py
        vy = -restitution * vy
    elif py < -lim:
        py = -2.0 * lim - py
        vy = -restitution * vy
    vx *= damping
    vy *= damping
    return px, py, vx, vy


@nb.njit(cache=True)
def _episode_kernel(
    genes, base_x, base_y, link, phase_steps, dt, puck_x0, puck_y0,
    puck_r, restitution, damping, sample_every,
):
    a = genes[0:4]
    b = genes[4:8]
    duration = phase_steps * dt
    va2 = 0.0
    vb2 = 0.0
    for j in range(4):
        va2 += (a[j] / duration) ** 2
        vb2 += ((b[j] - a[j]) / duration) ** 2
    fitness = -va2 * phase_steps  # phase 1: arm moves, no puck yet
    px = puck_x0
    py = puck_y0
    vx = 0.0
    vy = 0.0
    n_samples = phase_steps // sample_every
    samples = np.empty(2 * n_samples)
    theta = np.empty(4)
    si = 0
    pts_prev = _fk_kernel(a, base_x, base_y, link)
    for i in range(1, phase_steps + 1):
        frac = i / phase_steps
        for j in range(4):
            theta[j] = a[j] + (b[j] - a[j]) * frac
        pts_cur = _fk_kernel(theta, base_x, base_y, link)
        px, py, vx, vy = _puck_step_kernel(
            px, py, vx, vy, pts_prev, pts_cur, dt,
            puck_r, restitution, damping, ARENA_HALF,
        )
        pts_prev = pts_cur
        fitness -= vb2
        if i % sample_every == 0:
            samples[si] = px
            samples[si + 1] = py
            si += 2
    return fitness, samples


def forward_kinematics(config) -> np.ndarray:
    """Joint positions of the planar chain, base through end effector (5, 2)."""
    angles = np.asarray(config, dtype=np.float64)
    if angles.shape != (N_LINKS,):
        raise ValueError(f"arm config must have {N_LINKS} angles")
    return _fk_kernel(angles, BASE[0], BASE[1], LINK_LENGTH)


def puck_step(
    puck: PuckState, arm_points: np.ndarray, prev_arm_points: np.ndarray | None = None,
    dt: float = DT,
) -> PuckState:
    """Advance the puck one step against an arm given by joint positions.

    `prev_arm_points` supplies the previous-step geometry for the contact
    point velocity; omit it for a static arm.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    pts = np.asarray(arm_points, dtype=np.float64)
    prev = pts if prev_arm_points is None else np.asarray(prev_arm_points, dtype=np.float64)
    px, py, vx, vy = _puck_step_kernel(
        puck.x, puck.y, puck.vx, puck.vy, prev, pts, dt,
        PUCK_RADIUS, RESTITUTION, DAMPING, ARENA_HALF,
    )
    return PuckState(float(px), float(py), float(vx), float(vy))


def evaluate_airhockey(genotype: Genotype):
    """Run one episode; returns (fitness, puck trajectory, final position)."""
    g = np.asarray(genotype.values, dtype=np.float64)
    if g.shape[0] != GENOTYPE_LENGTH:
        raise ValueError(f"air-hockey genotype must have {GENOTYPE_LENGTH} genes")
    fitness, samples = _episode_kernel(
        g, BASE[0], BASE[1], LINK_LENGTH, PHASE_STEPS, DT,
        PUCK_START[0], PUCK_START[1], PUCK_RADIUS, RESTITUTION, DAMPING, SAMPLE_EVERY,
    )
    bd = samples[-2:].copy()
    return float(fitness), samples, bd
