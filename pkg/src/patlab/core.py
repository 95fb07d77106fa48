"""Static pattern algebra: topologies, generator spaces, configurations.

A generator space pairs a bond-value table (one row per template generator)
with a cyclic group of bond-slot rotations. Configurations assign one
generator instance (template index ``alpha``, rotation ``s``) to every site
of a rectangular lattice. Everything here is immutable value data; growth
dynamics live in :mod:`patlab.growth`.

Conventions, pinned once and tested:

* Lattice sites are (row, col) with row 0 at the top.
* Directions are 1-based slots into ``Topology.offsets``.
* ``alpha`` is 0-based and ``alpha == 0`` is the empty generator, which
  always carries ``s == 1``.
* ``s`` is 1-based; ``s`` rotates a bond row one slot forward per unit,
  so slot ``j`` of the rotated row held slot ``j - (s-1)`` of the original.
* Flattened generator indices ``ge = alpha * bsg_order + s`` are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BondValueOutOfRange,
    IndexOutOfRange,
    InvalidDirection,
    RowLengthMismatch,
)


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Topology:
    """Ordered neighbor displacements of a square-lattice neighborhood.

    ``offsets[d-1]`` is the (d_row, d_col) displacement of direction ``d``.
    """

    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        offs = tuple((int(r), int(c)) for r, c in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if len(set(offs)) != len(offs):
            raise ValueError("topology offsets must be pairwise distinct")
        if any(o == (0, 0) for o in offs):
            raise ValueError("topology offsets must be nonzero")

    @property
    def arity(self) -> int:
        return len(self.offsets)


def moore8() -> Topology:
    """Eight-neighbor topology, first direction on top, then clockwise."""
    return Topology(
        offsets=(
            (-1, 0),   # top
            (-1, 1),   # top-right
            (0, 1),    # right
            (1, 1),    # bottom-right
            (1, 0),    # bottom
            (1, -1),   # bottom-left
            (0, -1),   # left
            (-1, -1),  # top-left
        )
    )


def four_neighbor() -> Topology:
    """Four-neighbor topology in right, top, left, bottom order.

    This is the direction order used by the classic four-bond textbook
    demos, not the top-first order of :func:`moore8`.
    """
    return Topology(offsets=((0, 1), (-1, 0), (0, -1), (1, 0)))


@dataclass(frozen=True)
class GeneratorSpace:
    """A bond table, the cyclic rotation group acting on it, and a topology.

    ``bond_table[alpha]`` lists the bond values of template ``alpha`` in
    direction-slot order. A bond value ``v >= 1`` requests template row
    ``v`` (1-based, so template index ``v - 1``); 0 means no bond. The
    full space has ``row_count * bsg_order`` members.
    """

    bond_table: np.ndarray
    topology: Topology
    bsg_order: int

    @property
    def row_count(self) -> int:
        return int(self.bond_table.shape[0])

    @property
    def size(self) -> int:
        return self.row_count * self.bsg_order


def build_generator_space(g0_table, topology: Topology) -> GeneratorSpace:
    """Validate a bond table against a topology and assemble the space.

    The rotation group order always equals the arity: the group is the
    cyclic permutation of bond slots.
    """
    rows = [list(row) for row in g0_table]
    if not rows:
        raise RowLengthMismatch("bond table must have at least one row")
    for i, row in enumerate(rows):
        if len(row) != topology.arity:
            raise RowLengthMismatch(
                f"row {i} has {len(row)} bonds, expected arity {topology.arity}"
            )
    table = _frozen_array(rows, dtype=np.int64)
    if table.min() < 0 or table.max() > len(rows):
        bad = int(table.max() if table.max() > len(rows) else table.min())
        raise BondValueOutOfRange(
            f"bond value {bad} outside [0, {len(rows)}]"
        )
    return GeneratorSpace(bond_table=table, topology=topology, bsg_order=topology.arity)


@dataclass(frozen=True)
class GeneratorInstance:
    """One generator: template index ``alpha`` plus rotation ``s``."""

    alpha: int
    s: int


def transformed_bonds(space: GeneratorSpace, g: GeneratorInstance) -> np.ndarray:
    """Bond row of ``g`` after applying its rotation.

    Slot ``j`` of the result is the bond value facing absolute direction
    ``j``; rotating by one slot turns the generator one direction step
    forward in topology order.
    """
    if not 0 <= g.alpha < space.row_count:
        raise IndexOutOfRange(f"alpha {g.alpha} outside [0, {space.row_count})")
    if not 1 <= g.s <= space.bsg_order:
        raise IndexOutOfRange(f"s {g.s} outside [1, {space.bsg_order}]")
    return np.roll(space.bond_table[g.alpha], g.s - 1)


def ge_index(space: GeneratorSpace, g: GeneratorInstance) -> int:
    """1-based flattened index of ``g`` within the space."""
    if not 0 <= g.alpha < space.row_count:
        raise IndexOutOfRange(f"alpha {g.alpha} outside [0, {space.row_count})")
    if not 1 <= g.s <= space.bsg_order:
        raise IndexOutOfRange(f"s {g.s} outside [1, {space.bsg_order}]")
    return g.alpha * space.bsg_order + g.s


def from_ge_index(space: GeneratorSpace, ge: int) -> GeneratorInstance:
    """Inverse of :func:`ge_index`."""
    if not 1 <= ge <= space.size:
        raise IndexOutOfRange(f"ge {ge} outside [1, {space.size}]")
    alpha, rem = divmod(ge - 1, space.bsg_order)
    return GeneratorInstance(alpha=alpha, s=rem + 1)


def neighbor_site(topology: Topology, site, direction: int, bounds):
    """Site shifted one step along ``direction``, or None when it leaves
    the ``(width, height)`` lattice. No wrap-around.
    """
    if not 1 <= direction <= topology.arity:
        raise InvalidDirection(f"direction {direction} outside [1, {topology.arity}]")
    width, height = bounds
    dr, dc = topology.offsets[direction - 1]
    r, c = site[0] + dr, site[1] + dc
    if 0 <= r < height and 0 <= c < width:
        return (r, c)
    return None


@dataclass(frozen=True)
class Configuration:
    """A dense lattice of generator instances.

    ``alpha`` and ``s`` are (height, width) integer grids. Instances are
    immutable; use :meth:`with_generator` to derive an edited copy.
    """

    alpha: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        alpha = _frozen_array(self.alpha, dtype=np.int16)
        s = _frozen_array(self.s, dtype=np.int16)
        if alpha.ndim != 2 or alpha.shape != s.shape:
            raise ValueError("alpha and s must be matching 2-D grids")
        if s.min(initial=1) < 1:
            raise ValueError("s values must be >= 1")
        if np.any(s[alpha == 0] != 1):
            raise ValueError("empty sites (alpha=0) must carry s=1")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "s", s)

    @property
    def height(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def width(self) -> int:
        return int(self.alpha.shape[1])

    @staticmethod
    def empty(width: int, height: int) -> "Configuration":
        return Configuration(
            alpha=np.zeros((height, width), dtype=np.int16),
            s=np.ones((height, width), dtype=np.int16),
        )

    def with_generator(self, site, g: GeneratorInstance) -> "Configuration":
        alpha = np.array(self.alpha)
        s = np.array(self.s)
        alpha[site] = g.alpha
        s[site] = g.s
        return Configuration(alpha=alpha, s=s)

    def at(self, site) -> GeneratorInstance:
        return GeneratorInstance(alpha=int(self.alpha[site]), s=int(self.s[site]))

    def nonempty_count(self) -> int:
        return int(np.count_nonzero(self.alpha))


def space_to_json(space: GeneratorSpace) -> dict:
    """JSON form: {"arity", "offsets" [[dr,dc],...], "g0" [[...],...]}."""
    return {
        "arity": space.topology.arity,
        "offsets": [list(o) for o in space.topology.offsets],
        "g0": space.bond_table.tolist(),
    }


def space_from_json(doc: dict) -> GeneratorSpace:
    offsets = tuple(tuple(o) for o in doc["offsets"])
    if len(offsets) != int(doc["arity"]):
        raise RowLengthMismatch("offsets length disagrees with declared arity")
    return build_generator_space(doc["g0"], Topology(offsets=offsets))


def config_to_json(config: Configuration) -> dict:
    """JSON form: {"w", "h", "alpha" row-major, "s" row-major}."""
    return {
        "w": config.width,
        "h": config.height,
        "alpha": config.alpha.ravel().tolist(),
        "s": config.s.ravel().tolist(),
    }


def config_from_json(doc: dict) -> Configuration:
    w, h = int(doc["w"]), int(doc["h"])
    alpha = np.array(doc["alpha"], dtype=np.int16).reshape(h, w)
    s = np.array(doc["s"], dtype=np.int16).reshape(h, w)
    return Configuration(alpha=alpha, s=s)
