"""Deterministic 2-D maze task.

A disc robot with differential-drive kinematics, three ray-cast lasers
(-pi/4, 0, +pi/4; 100-unit range) and two front contact sensors is driven
by a 5-5-2 tanh MLP for 2000 steps in a 600x600 arena. Fitness penalises
energy, -sum(|u_t|^2). Sensory data is a 64x64 grayscale top-down rendering
of the arena at the end of the episode; the hand-coded descriptor is the
final robot position.

Geometry conventions: lasers originate at the robot centre and report the
hit distance minus the robot radius (floored at 0, capped at the range).
Collisions resolve by advancing to the contact point, then sliding the
remaining displacement along the wall tangent, cancelling after three
unresolved sub-steps. Walls come from a plain-text world file, one
`x1 y1 x2 y2` segment per line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

import numba as nb
import numpy as np

from ..core import Genotype

ARENA_SIZE = 600.0
ROBOT_RADIUS = 10.0
AXLE_LENGTH = 20.0
DT = 1.0
U_MAX = 2.0
LASER_RANGE = 100.0
LASER_ANGLES = (-math.pi / 4.0, 0.0, math.pi / 4.0)
EPISODE_STEPS = 2000
IMAGE_SIZE = 64
GENOTYPE_LENGTH = 42  # 5x5 + 5 hidden weights/biases, 2x5 + 2 output
GENE_BOUND = 5.0
DEFAULT_START = (60.0, 60.0, math.pi / 2.0)

_CONTACT_EPS = 1e-6
_SAFETY_EPS = 1e-9


@dataclass(frozen=True)
class MazeWorld:
    walls: np.ndarray  # (n, 4) segments x1 y1 x2 y2, arena border included
    start_pose: tuple[float, float, float] = DEFAULT_START
    robot_radius: float = ROBOT_RADIUS


@dataclass
class RobotState:
    x: float
    y: float
    heading: float
    contact_left: bool = False
    contact_right: bool = False


def arena_boundary(size: float = ARENA_SIZE) -> np.ndarray:
    return np.array(
        [
            [0.0, 0.0, size, 0.0],
            [size, 0.0, size, size],
            [size, size, 0.0, size],
            [0.0, size, 0.0, 0.0],
        ]
    )


def load_world(path=None, start_pose=DEFAULT_START) -> MazeWorld:
    """Load wall segments from a world file (default: the shipped maze)."""
    if path is None:
        ref = resources.files("latentqd.tasks").joinpath("worlds/default_maze.txt")
        text = ref.read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    segments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"world file line {lineno}: expected 'x1 y1 x2 y2'")
        segments.append([float(p) for p in parts])
    if not segments:
        raise ValueError("world file defines no walls")
    return MazeWorld(np.array(segments, dtype=np.float64), start_pose)


# -- numba kernels ---------------------------------------------------------------


@nb.njit(cache=True)
def _closest_point_on_segment(px, py, x1, y1, x2, y2):
    dx = x2 - x1
    dy = y2 - y1
    length2 = dx * dx + dy * dy
    if length2 == 0.0:
        return x1, y1
    t = ((px - x1) * dx + (py - y1) * dy) / length2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return x1 + t * dx, y1 + t * dy


@nb.njit(cache=True)
def _min_wall_distance(walls, px, py):
    best = np.inf
    for i in range(walls.shape[0]):
        cx, cy = _closest_point_on_segment(
            px, py, walls[i, 0], walls[i, 1], walls[i, 2], walls[i, 3]
        )
        d2 = (px - cx) * (px - cx) + (py - cy) * (py - cy)
        if d2 < best:
            best = d2
    return math.sqrt(best)


@nb.njit(cache=True)
def _ray_hit_distance(walls, ox, oy, dx, dy):
    """Distance along the unit ray (dx, dy) to the nearest wall; inf if none."""
    best = np.inf
    for i in range(walls.shape[0]):
        wx = walls[i, 2] - walls[i, 0]
        wy = walls[i, 3] - walls[i, 1]
        denom = dx * wy - dy * wx
        if abs(denom) < 1e-12:
            continue
        qx = walls[i, 0] - ox
        qy = walls[i, 1] - oy
        inv = 1.0 / denom
        t = (qx * wy - qy * wx) * inv
        s = (qx * dy - qy * dx) * inv
        if t >= 0.0 and 0.0 <= s <= 1.0 and t < best:
            best = t
    return best


@nb.njit(cache=True)
def _laser_from_dir(walls, x, y, dx, dy, radius, laser_range):
    hit = _ray_hit_distance(walls, x, y, dx, dy)
    if not math.isfinite(hit):
        return laser_range
    reading = hit - radius
    if reading < 0.0:
        reading = 0.0
    elif reading > laser_range:
        reading = laser_range
    return reading


@nb.njit(cache=True)
def _laser_kernel(walls, x, y, angle, radius, laser_range):
    return _laser_from_dir(walls, x, y, math.cos(angle), math.sin(angle), radius, laser_range)


@nb.njit(cache=True)
def _step_kernel(walls, x, y, heading, ul, ur, radius, axle, dt, umax, clearance):
    """One kinematic step with sliding collision resolution.

    Returns (x, y, heading, contact_left, contact_right, clearance).
    Contacts reflect the end-of-step touching state. `clearance` is a lower
    bound on the distance from the robot centre to the nearest wall; pass
    the value returned by the previous step (or -inf to force a scan) so
    that wall checks are skipped while the robot is provably in the clear.
    """
    if ul > umax:
        ul = umax
    elif ul < -umax:
        ul = -umax
    if ur > umax:
        ur = umax
    elif ur < -umax:
        ur = -umax
    v = 0.5 * (ul + ur)
    omega = (ur - ul) / axle
    heading = heading + omega * dt
    ddx = v * math.cos(heading) * dt
    ddy = v * math.sin(heading) * dt

    step_len = math.sqrt(ddx * ddx + ddy * ddy)
    if clearance - step_len > radius + _CONTACT_EPS + _SAFETY_EPS:
        return x + ddx, y + ddy, heading, False, False, clearance - step_len

    for _attempt in range(3):
        if ddx == 0.0 and ddy == 0.0:
            break
        tx = x + ddx
        ty = y + ddy
        # deepest violated wall at the tentative position
        worst = -1
        worst_depth = _SAFETY_EPS
        for i in range(walls.shape[0]):
            cx, cy = _closest_point_on_segment(
                tx, ty, walls[i, 0], walls[i, 1], walls[i, 2], walls[i, 3]
            )
            depth = radius - math.sqrt((tx - cx) * (tx - cx) + (ty - cy) * (ty - cy))
            if depth > worst_depth:
                worst_depth = depth
                worst = i
        if worst < 0:
            x = tx
            y = ty
            break
        # advance to contact: largest fraction of the displacement that keeps
        # the disc clear of every wall (bisection; start position is valid)
        lo = 0.0
        hi = 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if _min_wall_distance(walls, x + mid * ddx, y + mid * ddy) >= radius - _SAFETY_EPS:
                lo = mid
            else:
                hi = mid
        x = x + lo * ddx
        y = y + lo * ddy
        # slide: remaining displacement projected onto the wall tangent
        remx = (1.0 - lo) * ddx
        remy = (1.0 - lo) * ddy
        wx = walls[worst, 2] - walls[worst, 0]
        wy = walls[worst, 3] - walls[worst, 1]
        wlen = math.hypot(wx, wy)
        if wlen == 0.0:
            ddx = 0.0
            ddy = 0.0
        else:
            dot = (remx * wx + remy * wy) / (wlen * wlen)
            ddx = dot * wx
            ddy = dot * wy

    contact_left = False
    contact_right = False
    clearance = np.inf
    for i in range(walls.shape[0]):
        cx, cy = _closest_point_on_segment(
            x, y, walls[i, 0], walls[i, 1], walls[i, 2], walls[i, 3]
        )
        d = math.sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy))
        if d < clearance:
            clearance = d
        if d <= radius + _CONTACT_EPS:
            phi = math.atan2(cy - y, cx - x) - heading
            while phi > math.pi:
                phi -= 2.0 * math.pi
            while phi < -math.pi:
                phi += 2.0 * math.pi
            if 0.0 <= phi <= math.pi / 2.0:
                contact_left = True
            if -math.pi / 2.0 <= phi <= 0.0:
                contact_right = True
    return x, y, heading, contact_left, contact_right, clearance


@nb.njit(cache=True)
def _episode_kernel(walls, sx, sy, sh, w1, b1, w2, b2, steps, radius, axle, dt, umax, laser_range):
    """Closed-loop rollout; returns final pose and energy fitness."""
    x = sx
    y = sy
    heading = sh
    cl = False
    cr = False
    clearance = _min_wall_distance(walls, x, y)
    inputs = np.empty(5)
    hidden = np.empty(5)
    fitness = 0.0
    half_sqrt2 = math.sqrt(0.5)  # cos(pi/4) == sin(pi/4)
    for _ in range(steps):
        ch = math.cos(heading)
        sh2 = math.sin(heading)
        # ray directions at heading -pi/4, 0, +pi/4 via angle addition
        lx = (ch + sh2) * half_sqrt2
        ly = (sh2 - ch) * half_sqrt2
        rx = (ch - sh2) * half_sqrt2
        ry = (sh2 + ch) * half_sqrt2
        inputs[0] = _laser_from_dir(walls, x, y, lx, ly, radius, laser_range) / laser_range
        inputs[1] = _laser_from_dir(walls, x, y, ch, sh2, radius, laser_range) / laser_range
        inputs[2] = _laser_from_dir(walls, x, y, rx, ry, radius, laser_range) / laser_range
        inputs[3] = 1.0 if cl else 0.0
        inputs[4] = 1.0 if cr else 0.0
        for j in range(5):
            acc = b1[j]
            for i in range(5):
                acc += w1[j, i] * inputs[i]
            hidden[j] = math.tanh(acc)
        acc0 = b2[0]
        acc1 = b2[1]
        for j in range(5):
            acc0 += w2[0, j] * hidden[j]
            acc1 += w2[1, j] * hidden[j]
        ul = math.tanh(acc0) * umax
        ur = math.tanh(acc1) * umax
        fitness -= ul * ul + ur * ur
        x, y, heading, cl, cr, clearance = _step_kernel(
            walls, x, y, heading, ul, ur, radius, axle, dt, umax, clearance
        )
    return x, y, heading, fitness


@nb.njit(cache=True, parallel=True)
def _episode_batch_kernel(
    walls, sx, sy, sh, w1s, b1s, w2s, b2s, steps, radius, axle, dt, umax, laser_range
):
    """Independent episodes in parallel; results are order-deterministic."""
    n = w1s.shape[0]
    out = np.empty((n, 4))
    for b in nb.prange(n):
        x, y, heading, fitness = _episode_kernel(
            walls, sx, sy, sh, w1s[b], b1s[b], w2s[b], b2s[b],
            steps, radius, axle, dt, umax, laser_range,
        )
        out[b, 0] = x
        out[b, 1] = y
        out[b, 2] = heading
        out[b, 3] = fitness
    return out


@nb.njit(cache=True)
def _render_kernel(walls, rx, ry, radius, size, arena):
    """Rasterise walls (0.5) and the robot disc (1.0) on a black background."""
    img = np.zeros((size, size))
    scale = size / arena
    for i in range(walls.shape[0]):
        x1 = walls[i, 0] * scale
        y1 = walls[i, 1] * scale
        x2 = walls[i, 2] * scale
        y2 = walls[i, 3] * scale
        steps = int(max(abs(x2 - x1), abs(y2 - y1))) + 1
        for s in range(steps + 1):
            t = s / steps
            px = int(x1 + (x2 - x1) * t)
            py = int(y1 + (y2 - y1) * t)
            if px < 0:
                px = 0
            elif px >= size:
                px = size - 1
            if py < 0:
                py = 0
            elif py >= size:
                py = size - 1
            img[py, px] = 0.5
    cx = rx * scale
    cy = ry * scale
    rp = radius * scale
    x0 = max(int(math.floor(cx - rp)) - 1, 0)
    x1 = min(int(math.ceil(cx + rp)) + 1, size - 1)
    y0 = max(int(math.floor(cy - rp)) - 1, 0)
    y1 = min(int(math.ceil(cy + rp)) + 1, size - 1)
    for py in range(y0, y1 + 1):
        for px in range(x0, x1 + 1):
            dx = px + 0.5 - cx
            dy = py + 0.5 - cy
            if dx * dx + dy * dy <= rp * rp:
                img[py, px] = 1.0
    return img


# -- python surface ---------------------------------------------------------------


def laser_reading(world: MazeWorld, state: RobotState, relative_angle: float) -> float:
    """Distance reading of one laser, in [0, LASER_RANGE]."""
    return float(
        _laser_kernel(
            world.walls, state.x, state.y, state.heading + relative_angle,
            world.robot_radius, LASER_RANGE,
        )
    )


def step(world: MazeWorld, state: RobotState, wheel_commands) -> RobotState:
    """Advance one time step under the given (left, right) wheel commands."""
    ul, ur = float(wheel_commands[0]), float(wheel_commands[1])
    x, y, heading, cl, cr, _ = _step_kernel(
        world.walls, state.x, state.y, state.heading, ul, ur,
        world.robot_radius, AXLE_LENGTH, DT, U_MAX, -np.inf,
    )
    return RobotState(float(x), float(y), float(heading), bool(cl), bool(cr))


def unpack_controller(genotype_values: np.ndarray):
    """Split the 42-gene vector into MLP weights: W1 (5x5), b1, W2 (2x5), b2."""
    g = np.asarray(genotype_values, dtype=np.float64)
    if g.shape[0] != GENOTYPE_LENGTH:
        raise ValueError(f"maze genotype must have {GENOTYPE_LENGTH} genes")
    w1 = g[0:25].reshape(5, 5).copy()
    b1 = g[25:30].copy()
    w2 = g[30:40].reshape(2, 5).copy()
    b2 = g[40:42].copy()
    return w1, b1, w2, b2


def render_topdown(world: MazeWorld, state: RobotState) -> np.ndarray:
    """64x64 grayscale view flattened row-major; values in {0, 0.5, 1}."""
    img = _render_kernel(
        world.walls, state.x, state.y, world.robot_radius, IMAGE_SIZE, ARENA_SIZE
    )
    return img.ravel()


def evaluate_maze(genotype: Genotype, world: MazeWorld | None = None):
    """Run one episode; returns (fitness, sensory image, final position)."""
    if world is None:
        world = load_world()
    w1, b1, w2, b2 = unpack_controller(genotype.values)
    sx, sy, sh = world.start_pose
    x, y, heading, fitness = _episode_kernel(
        world.walls, sx, sy, sh, w1, b1, w2, b2,
        EPISODE_STEPS, world.robot_radius, AXLE_LENGTH, DT, U_MAX, LASER_RANGE,
    )
    state = RobotState(float(x), float(y), float(heading))
    sensory = render_topdown(world, state)
    bd = np.array([state.x, state.y])
    return float(fitness), sensory, bd


def evaluate_maze_batch(genotypes: list[Genotype], world: MazeWorld | None = None):
    """Batch of episodes across cores; identical results to evaluate_maze."""
    if world is None:
        world = load_world()
    n = len(genotypes)
    w1s = np.empty((n, 5, 5))
    b1s = np.empty((n, 5))
    w2s = np.empty((n, 2, 5))
    b2s = np.empty((n, 2))
    for i, g in enumerate(genotypes):
        w1s[i], b1s[i], w2s[i], b2s[i] = unpack_controller(g.values)
    sx, sy, sh = world.start_pose
    out = _episode_batch_kernel(
        world.walls, sx, sy, sh, w1s, b1s, w2s, b2s,
        EPISODE_STEPS, world.robot_radius, AXLE_LENGTH, DT, U_MAX, LASER_RANGE,
    )
    results = []
    for i in range(n):
        state = RobotState(float(out[i, 0]), float(out[i, 1]), float(out[i, 2]))
        sensory = render_topdown(world, state)
        results.append((float(out[i, 3]), sensory, np.array([state.x, state.y])))
    return results
