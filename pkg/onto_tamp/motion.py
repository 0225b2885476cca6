"""Planar RRT-Connect for the gripper (plus whatever it holds).

The configuration space is the table plane. The moving body and every
obstacle are axis-aligned boxes, so a segment is tested exactly against the
obstacles grown by the moving half-extents (a swept-box slab test).
"""
import logging
import math
import time
from collections import deque

import numpy as np

from .models import (
    GOAL_IN_COLLISION,
    ITERATION_LIMIT,
    START_IN_COLLISION,
    MotionResult,
    Trajectory,
)

logger = logging.getLogger(__name__)

GOAL_BIAS = 0.05
_EPS = 1e-12


class CollisionChecker:
    """Collision tests for a box of ``half_extents`` moving among ``obstacles``."""

    def __init__(self, obstacles, half_extents, bounds, inflation=0.0):
        hx, hy = (float(v) for v in half_extents)
        grow = np.array([-hx - inflation, -hy - inflation, hx + inflation, hy + inflation])
        boxes = np.asarray(obstacles, dtype=float).reshape(-1, 4)
        self.expanded = boxes + grow
        self.bounds = tuple(float(v) for v in bounds)

    def in_bounds(self, point):
        xmin, ymin, xmax, ymax = self.bounds
        return xmin - _EPS <= point[0] <= xmax + _EPS and ymin - _EPS <= point[1] <= ymax + _EPS

    def point_free(self, point):
        if not self.in_bounds(point):
            return False
        if not len(self.expanded):
            return True
        x, y = point
        e = self.expanded
        inside = (e[:, 0] < x) & (x < e[:, 2]) & (e[:, 1] < y) & (y < e[:, 3])
        return not bool(inside.any())

    def segment_free(self, a, b):
        """True if the straight move from ``a`` to ``b`` touches no obstacle interior."""
        if not (self.point_free(a) and self.point_free(b)):
            return False
        if not len(self.expanded):
            return True
        a = np.asarray(a, dtype=float)
        d = np.asarray(b, dtype=float) - a
        e = self.expanded
        t_enter = np.zeros(len(e))
        t_exit = np.ones(len(e))
        blocked = np.ones(len(e), dtype=bool)
        for axis in (0, 1):
            lo, hi = e[:, axis], e[:, axis + 2]
            if abs(d[axis]) < _EPS:
                blocked &= (lo < a[axis]) & (a[axis] < hi)
                continue
            t1 = (lo - a[axis]) / d[axis]
            t2 = (hi - a[axis]) / d[axis]
            t_enter = np.maximum(t_enter, np.minimum(t1, t2))
            t_exit = np.minimum(t_exit, np.maximum(t1, t2))
        hits = blocked & (t_exit - t_enter > 1e-9)
        return not bool(hits.any())


class _Tree:
    def __init__(self, root):
        self.points = np.empty((64, 2))
        self.points[0] = root
        self.parents = [-1]

    def __len__(self):
        return len(self.parents)

    def add(self, point, parent):
        size = len(self.parents)
        if size == len(self.points):
            self.points = np.vstack([self.points, np.empty_like(self.points)])
        self.points[size] = point
        self.parents.append(parent)
        return size

    def nearest(self, point):
        diffs = self.points[:len(self.parents)] - point
        return int(np.argmin(np.einsum('ij,ij->i', diffs, diffs)))

    def path_to(self, index):
        path = []
        while index != -1:
            path.append(tuple(self.points[index]))
            index = self.parents[index]
        return path[::-1]


_TRAPPED, _ADVANCED, _REACHED = 0, 1, 2


def _extend(tree, target, checker, step):
    near = tree.nearest(target)
    origin = tree.points[near]
    delta = target - origin
    distance = float(np.hypot(*delta))
    if distance < _EPS:
        return _REACHED, near
    new = target if distance <= step else origin + delta * (step / distance)
    if not checker.segment_free(origin, new):
        return _TRAPPED, None
    index = tree.add(new, near)
    return (_REACHED if distance <= step else _ADVANCED), index


def _connect(tree, target, checker, step):
    while True:
        status, index = _extend(tree, target, checker, step)
        if status != _ADVANCED:
            return status, index


def densify(waypoints, step):
    """Insert evenly spaced points so no segment is longer than ``step``."""
    points = [tuple(map(float, waypoints[0]))]
    for a, b in zip(waypoints, waypoints[1:]):
        pieces = max(1, math.ceil(math.dist(a, b) / step - 1e-9))
        for i in range(1, pieces + 1):
            t = i / pieces
            points.append((a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t))
    return points


def shortcut(trajectory, checker, step):
    """Greedy smoothing: from each kept waypoint jump to the farthest visible one."""
    points = list(trajectory.waypoints)
    if len(points) < 3:
        return trajectory
    kept = [points[0]]
    i = 0
    while i < len(points) - 1:
        j = len(points) - 1
        while j > i + 1 and not checker.segment_free(points[i], points[j]):
            j -= 1
        kept.append(points[j])
        i = j
    smoothed = Trajectory.from_waypoints(densify(kept, step))
    return smoothed if smoothed.length < trajectory.length else trajectory


def plan_motion(query):
    """Plan a collision-free planar path for ``query``.

    Returns a ``MotionResult``; failures carry one of the reason strings
    ``GoalInCollision``, ``StartInCollision`` or ``IterationLimit``.
    """
    started = time.perf_counter()
    checker = CollisionChecker(query.obstacles, query.half_extents, query.bounds, query.inflation)
    start = np.asarray(query.start, dtype=float)
    goal = np.asarray(query.goal, dtype=float)

    def finish(reason=None, waypoints=None, iterations=0):
        trajectory = None
        if waypoints is not None:
            trajectory = shortcut(Trajectory.from_waypoints(densify(waypoints, query.step)),
                                  checker, query.step)
        else:
            logger.debug("Motion query %s -> %s failed: %s", query.start, query.goal, reason)
        return MotionResult(trajectory=trajectory, reason=reason,
                            elapsed=time.perf_counter() - started, iterations=iterations)

    if not checker.point_free(start):
        return finish(START_IN_COLLISION)
    if not checker.point_free(goal):
        return finish(GOAL_IN_COLLISION)
    if float(np.hypot(*(goal - start))) <= query.goal_tolerance:
        return finish(waypoints=[tuple(start)])
    if checker.segment_free(start, goal):
        return finish(waypoints=[tuple(start), tuple(goal)])

    rng = np.random.default_rng(query.seed)
    low = np.array(query.bounds[:2], dtype=float)
    high = np.array(query.bounds[2:], dtype=float)
    start_tree, goal_tree = _Tree(start), _Tree(goal)
    grow, other = start_tree, goal_tree

    for iteration in range(1, query.max_iterations + 1):
        if rng.random() < GOAL_BIAS:
            sample = other.points[0].copy()
        else:
            sample = rng.uniform(low, high)
        status, new = _extend(grow, sample, checker, query.step)
        if status != _TRAPPED:
            reached, joint = _connect(other, grow.points[new].copy(), checker, query.step)
            if reached == _REACHED:
                path = grow.path_to(new) + other.path_to(joint)[::-1][1:]
                if grow is goal_tree:
                    path.reverse()
                return finish(waypoints=path, iterations=iteration)
        grow, other = other, grow

    return finish(ITERATION_LIMIT, iterations=query.max_iterations)


def grid_path_exists(query, resolution=None):
    """Breadth-first search over a lattice of free points; a feasibility oracle.

    Start and goal are joined to their nearest lattice points with straight
    moves. Lattice edges are checked with the same exact segment test.
    """
    resolution = resolution or query.step / 2.0
    checker = CollisionChecker(query.obstacles, query.half_extents, query.bounds, query.inflation)
    if not (checker.point_free(query.start) and checker.point_free(query.goal)):
        return False
    if checker.segment_free(query.start, query.goal):
        return True

    xmin, ymin, xmax, ymax = checker.bounds
    nx = int(math.floor((xmax - xmin) / resolution)) + 1
    ny = int(math.floor((ymax - ymin) / resolution)) + 1

    def point(cell):
        return (xmin + cell[0] * resolution, ymin + cell[1] * resolution)

    def attached(p):
        base = (round((p[0] - xmin) / resolution), round((p[1] - ymin) / resolution))
        cells = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                cell = (min(max(base[0] + dx, 0), nx - 1), min(max(base[1] + dy, 0), ny - 1))
                if cell not in cells and checker.segment_free(p, point(cell)):
                    cells.append(cell)
        return cells

    targets = set(attached(query.goal))
    frontier = deque(attached(query.start))
    seen = set(frontier)
    while frontier:
        cell = frontier.popleft()
        if cell in targets:
            return True
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nxt = (cell[0] + dx, cell[1] + dy)
            if nxt in seen or not (0 <= nxt[0] < nx and 0 <= nxt[1] < ny):
                continue
            if checker.segment_free(point(cell), point(nxt)):
                seen.add(nxt)
                frontier.append(nxt)
    return False
