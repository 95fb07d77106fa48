"""Configuration transformations: environment, growth rules, iteration.

One growth step reads a snapshot of the lattice, collects every bond each
non-empty generator extends toward a neighboring site (the environment),
and fills empty sites according to the active rule variant:

* ``original`` — a site is filled only when exactly one bond targets it;
  the spawn's orientation label follows the textbook's raw array-index
  order (one slot behind the visual direction).
* ``revised`` — same placement, but the orientation equals the visual
  direction of the spawn.
* ``modified`` — a site is filled whenever at least one bond targets it;
  among competing bonds the largest bond value wins, ties going to the
  smallest direction index. Orientation as in ``revised``.
* ``max`` — the plain integer demo rule: an empty cell copies the maximum
  of its Moore neighbors unless that maximum equals the threshold ``r``.

A bond value ``v >= 1`` spawns template ``v - 1``; spawning template 0
leaves the site empty (it is a placement of the empty generator, which
also means such a "win" blocks nothing and changes nothing).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Configuration, GeneratorSpace
from .errors import UnsupportedVariant

VARIANTS = ("original", "revised", "modified", "max")


@dataclass(frozen=True)
class GrowthRule:
    """Rule variant plus the maximum number of time-steps it may run."""

    variant: str
    step_cap: int = 12
    r: int = 5  # threshold for the "max" demo rule only

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise UnsupportedVariant(f"unknown variant {self.variant!r}")
        if self.step_cap < 0:
            raise ValueError("step_cap must be >= 0")


@dataclass(frozen=True)
class Environment:
    """Per-site, per-direction incoming bond values.

    ``values[r, c, d-1]`` is the bond value reaching site (r, c) from the
    parent one step against direction ``d`` (the parent sits at
    ``(r, c) - offsets[d-1]`` and extends its slot-``d`` bond). Separate
    parents land in separate slots, so competitor counts are exact.
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def contribution_counts(self) -> np.ndarray:
        """Number of nonzero incoming bonds per site."""
        return np.count_nonzero(self.values, axis=2)


def _bond_lut(space: GeneratorSpace) -> np.ndarray:
    """(row_count, bsg_order + 1, arity) table of rotated bond rows.

    Indexed directly by the 1-based s (slot 0 unused) to save a subtraction
    in the hot loop. Memoized on the space instance; the table is derived
    data, so the space stays a shareable immutable value.
    """
    cached = getattr(space, "_bond_lut_cache", None)
    if cached is not None:
        return cached
    rows, order = space.row_count, space.bsg_order
    lut = np.zeros((rows, order + 1, space.topology.arity), dtype=np.int16)
    for a in range(rows):
        for s in range(1, order + 1):
            lut[a, s] = np.roll(space.bond_table[a], s - 1)
    lut.setflags(write=False)
    object.__setattr__(space, "_bond_lut_cache", lut)
    return lut


def _env_arrays(offsets, lut, alpha: np.ndarray, s: np.ndarray,
                empty=None) -> np.ndarray:
    h, w = alpha.shape
    bonds = lut[alpha, s]  # (h, w, arity), fresh writable array
    bonds[alpha == 0 if empty is None else empty] = 0
    env = np.zeros_like(bonds)
    for d0, (dr, dc) in enumerate(offsets):
        r0, r1 = max(dr, 0), h + min(dr, 0)
        c0, c1 = max(dc, 0), w + min(dc, 0)
        env[r0:r1, c0:c1, d0] = bonds[r0 - dr:r1 - dr, c0 - dc:c1 - dc, d0]
    return env


def _step_arrays(offsets, lut, alpha, s, variant):
    """One step on raw grids; returns (alpha, s, changed)."""
    empty = alpha == 0
    env = _env_arrays(offsets, lut, alpha, s, empty)
    winner_value = env.max(axis=2)
    if variant == "modified":
        fill = empty & (winner_value > 0)
    else:
        fill = empty & (np.count_nonzero(env, axis=2) == 1)
    # a step only changes the lattice when some fill places a non-empty
    # generator (spawning the empty template is a no-op)
    if not (winner_value[fill] > 1).any():
        return alpha, s, False

    winner_dir0 = env.argmax(axis=2)  # first max == smallest direction index
    if variant == "original":
        spawn_s = (winner_dir0 - 1) % len(offsets) + 1
    else:
        spawn_s = winner_dir0 + 1
    out_alpha = alpha.copy()
    np.copyto(out_alpha, winner_value - 1, where=fill, casting="same_kind")
    out_s = s.copy()
    np.copyto(out_s, spawn_s, where=fill, casting="same_kind")
    out_s[out_alpha == 0] = 1
    return out_alpha, out_s, True


def compenv(space: GeneratorSpace, config: Configuration, _lut=None) -> Environment:
    """Collect the bonds every non-empty generator extends to its neighbors."""
    if config.height <= 0 or config.width <= 0:
        raise ValueError("configuration dimensions must be positive")
    lut = _bond_lut(space) if _lut is None else _lut
    env = _env_arrays(space.topology.offsets, lut, np.asarray(config.alpha),
                      np.asarray(config.s))
    return Environment(values=env)


def growth_step(space: GeneratorSpace, config: Configuration, rule: GrowthRule,
                _lut=None) -> Configuration:
    """One simultaneous growth step under ``original``/``revised``/``modified``."""
    if rule.variant == "max":
        raise UnsupportedVariant("use max_rule_step for the max rule")
    lut = _bond_lut(space) if _lut is None else _lut
    alpha, s, _ = _step_arrays(space.topology.offsets, lut,
                               np.asarray(config.alpha), np.asarray(config.s),
                               rule.variant)
    return Configuration(alpha=alpha, s=s)


_MOORE = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))


def max_rule_step(lattice: np.ndarray, r: int) -> np.ndarray:
    """Demo rule on a plain integer lattice: empty cells copy the maximum
    Moore-neighbor value ``m`` when ``m > 0`` and ``m != r``.
    """
    grid = np.asarray(lattice)
    h, w = grid.shape
    m = np.zeros_like(grid)
    for dr, dc in _MOORE:
        r0, r1 = max(dr, 0), h + min(dr, 0)
        c0, c1 = max(dc, 0), w + min(dc, 0)
        shifted = np.zeros_like(grid)
        shifted[r0:r1, c0:c1] = grid[r0 - dr:r1 - dr, c0 - dc:c1 - dc]
        m = np.maximum(m, shifted)
    place = (grid == 0) & (m > 0) & (m != r)
    return np.where(place, m, grid)


def develop(space: GeneratorSpace, config: Configuration, rule: GrowthRule,
            steps: int) -> tuple[Configuration, int]:
    """Iterate the rule up to ``min(steps, rule.step_cap)`` times.

    Stops early at a fixed point (a step that changes nothing) and returns
    the final configuration together with the number of productive steps.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    budget = min(steps, rule.step_cap)
    alpha = np.asarray(config.alpha)
    s = np.asarray(config.s)
    executed = 0
    if rule.variant == "max":
        for _ in range(budget):
            grid = max_rule_step(alpha, rule.r)
            if np.array_equal(grid, alpha):
                break
            alpha = grid
            executed += 1
        s = np.ones_like(alpha)
    else:
        lut = _bond_lut(space)
        offsets = space.topology.offsets
        for _ in range(budget):
            alpha, s, changed = _step_arrays(offsets, lut, alpha, s, rule.variant)
            if not changed:
                break
            executed += 1
    if executed == 0:
        return config, 0
    return Configuration(alpha=alpha, s=s), executed
