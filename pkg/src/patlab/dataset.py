"""Synthetic 28x28 digit dataset grown from sparse seed configurations.

Each class is a template: a handful of seed sites, each holding the
stroke-spawning template generator (alpha=1) with a fixed orientation.
A sample jitters the template by a global integer translation, grows the
lattice for a uniformly drawn number of steps under the modified rule,
renders non-empty sites to a binary image, and optionally applies a small
joint rotation to the image and both label lattices.

Determinism contract: a sample is a pure function of its derived 64-bit
seed plus the sampling options. Seeds come from a splitmix64 chain over
(master_seed, sample_index), so generation is order-independent and can
be partitioned across workers arbitrarily.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import Configuration, GeneratorSpace, build_generator_space, moore8
from .errors import DimensionMismatch, LabelOutOfRange
from .growth import GrowthRule, develop

LATTICE = 28
STEP_RANGE = (8, 12)   # inclusive draw for growth depth
JITTER_RANGE = 2       # global translation drawn from [-2, 2] per axis
ROTATION_DEG = 10.0    # rotation drawn from [-10, 10] degrees

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def stroke_space() -> GeneratorSpace:
    """The 8-direction space whose template 1 grows straight strokes."""
    return build_generator_space(
        [
            [0, 0, 0, 0, 0, 0, 0, 0],
            [2, 3, 4, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0, 0, 2],
            [0, 0, 0, 0, 0, 0, 0, 0],
        ],
        moore8(),
    )


def splitmix64(x: int) -> int:
    """One splitmix64 output for state ``x`` (Steele et al. constants)."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def sample_words(master_seed: int, index: int) -> tuple[int, int]:
    """(class_word, sample_seed) for one sample index.

    Words ``2i`` and ``2i + 1`` of the splitmix64 sequence seeded at
    ``master_seed``; the class word picks the class when drawing uniformly,
    the second word seeds the per-sample generator.
    """
    base = (master_seed + 2 * index * _GOLDEN) & _MASK64
    return splitmix64(base), splitmix64((base + _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class ClassTemplate:
    """Seed recipe for one class: (row, col, s) triples on the lattice."""

    class_id: int
    seeds: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        seeds = tuple((int(r), int(c), int(s)) for r, c, s in self.seeds)
        object.__setattr__(self, "seeds", seeds)
        if not 0 <= self.class_id <= 9:
            raise LabelOutOfRange(f"class_id {self.class_id} outside 0..9")
        if not seeds:
            raise ValueError("a template needs at least one seed")
        for r, c, s in seeds:
            if not (1 <= r <= LATTICE - 2 and 1 <= c <= LATTICE - 2):
                raise ValueError(f"seed {(r, c)} violates the margin-1 bound")
            if not 1 <= s <= 8:
                raise LabelOutOfRange(f"seed s {s} outside 1..8")
        if len({(r, c) for r, c, _ in seeds}) != len(seeds):
            raise ValueError("seed sites must be distinct")


@dataclass(frozen=True)
class SampleRecord:
    """One dataset item.

    ``seed_alpha``/``seed_s`` are the *initial* (sparse) configuration,
    not the grown one; the image always equals rendering the growth of
    that configuration for ``steps`` steps, pre-rotation.
    """

    image: np.ndarray
    class_label: int
    seed_alpha: np.ndarray
    seed_s: np.ndarray
    steps: int
    rng_seed: int

    def __post_init__(self):
        for name in ("image", "seed_alpha", "seed_s"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def templates_from_json(doc) -> list[ClassTemplate]:
    """Parse [{"class": int, "seeds": [[row, col, s], ...]}, ...]."""
    out = [
        ClassTemplate(class_id=entry["class"],
                      seeds=tuple(tuple(seed) for seed in entry["seeds"]))
        for entry in doc
    ]
    return sorted(out, key=lambda t: t.class_id)


def templates_to_json(templates) -> list:
    return [
        {"class": t.class_id, "seeds": [list(seed) for seed in t.seeds]}
        for t in templates
    ]


def default_templates() -> list[ClassTemplate]:
    """The ten built-in digit templates shipped as package data."""
    doc = json.loads(
        resources.files("patlab").joinpath("data/templates.json").read_text()
    )
    templates = templates_from_json(doc)
    if sorted(t.class_id for t in templates) != list(range(10)):
        raise ValueError("packaged templates must cover classes 0..9 once each")
    return templates


def seed_configuration(template: ClassTemplate, shift=(0, 0)) -> Configuration:
    """Sparse initial configuration for a (possibly shifted) template."""
    alpha = np.zeros((LATTICE, LATTICE), dtype=np.int16)
    s = np.ones((LATTICE, LATTICE), dtype=np.int16)
    dr, dc = shift
    for r, c, sv in template.seeds:
        alpha[r + dr, c + dc] = 1
        s[r + dr, c + dc] = sv
    return Configuration(alpha=alpha, s=s)


def _clamped_shift(template: ClassTemplate, dr: int, dc: int) -> tuple[int, int]:
    rows = [r for r, _, _ in template.seeds]
    cols = [c for _, c, _ in template.seeds]
    lo_r, hi_r = 1 - min(rows), (LATTICE - 2) - max(rows)
    lo_c, hi_c = 1 - min(cols), (LATTICE - 2) - max(cols)
    return min(max(dr, lo_r), hi_r), min(max(dc, lo_c), hi_c)


def _render_grid(config: Configuration) -> np.ndarray:
    return (config.alpha != 0).astype(np.float64)


def render(config: Configuration) -> np.ndarray:
    """Binary 28x28 image of a configuration: non-empty sites are 1.0."""
    if (config.height, config.width) != (LATTICE, LATTICE):
        raise DimensionMismatch(
            f"expected a {LATTICE}x{LATTICE} configuration, "
            f"got {config.height}x{config.width}"
        )
    return _render_grid(config)


def _rotate_nearest(arr: np.ndarray, angle_deg: float, fill) -> np.ndarray:
    """Rotate about the lattice center, nearest-neighbor, constant fill."""
    h, w = arr.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    rows, cols = np.mgrid[0:h, 0:w]
    dy, dx = rows - cy, cols - cx
    # inverse map: source coordinates that land on each target pixel
    src_r = np.rint(cy + cos_t * dy + sin_t * dx).astype(np.int64)
    src_c = np.rint(cx - sin_t * dy + cos_t * dx).astype(np.int64)
    inside = (src_r >= 0) & (src_r < h) & (src_c >= 0) & (src_c < w)
    out = np.full_like(arr, fill)
    out[inside] = arr[src_r[inside], src_c[inside]]
    return out


def sample(space: GeneratorSpace, templates, class_id: int, seed: int, *,
           rotation: bool = False, jitter: bool = True) -> SampleRecord:
    """Draw one sample. Pure function of (seed, options).

    Draw order from the per-sample generator is frozen: translation
    (when jitter is on), growth depth, rotation angle (when rotation is
    on). Replaying with the same seed and options is bit-identical.
    """
    if not 0 <= class_id <= 9:
        raise LabelOutOfRange(f"class_id {class_id} outside 0..9")
    rng = np.random.default_rng(seed)
    template = next(t for t in templates if t.class_id == class_id)

    shift = (0, 0)
    if jitter:
        dr, dc = rng.integers(-JITTER_RANGE, JITTER_RANGE + 1, size=2)
        shift = _clamped_shift(template, int(dr), int(dc))
    c0 = seed_configuration(template, shift)
    steps = int(rng.integers(STEP_RANGE[0], STEP_RANGE[1] + 1))

    grown, _ = develop(space, c0, GrowthRule("modified", step_cap=steps), steps)
    image = _render_grid(grown)
    seed_alpha = np.array(c0.alpha, dtype=np.uint8)
    seed_s = np.array(c0.s, dtype=np.uint8)

    if rotation:
        angle = float(rng.uniform(-ROTATION_DEG, ROTATION_DEG))
        image = _rotate_nearest(image, angle, 0.0)
        seed_alpha = _rotate_nearest(seed_alpha, angle, 0)
        seed_s = _rotate_nearest(seed_s, angle, 1)
        seed_s = np.where(seed_alpha == 0, 1, seed_s).astype(np.uint8)

    return SampleRecord(
        image=image,
        class_label=class_id,
        seed_alpha=seed_alpha,
        seed_s=seed_s,
        steps=steps,
        rng_seed=seed,
    )


def make_record(space: GeneratorSpace, templates, master_seed: int, index: int,
                *, class_id=None, rotation: bool = False,
                jitter: bool = True) -> SampleRecord:
    """Sample ``index`` of the dataset stream for ``master_seed``."""
    class_word, sample_seed = sample_words(master_seed, index)
    cls = class_word % 10 if class_id is None else class_id
    return sample(space, templates, cls, sample_seed,
                  rotation=rotation, jitter=jitter)


_WORKER_STATE: dict = {}


def _worker_init(master_seed, class_id, rotation, jitter):
    _WORKER_STATE["space"] = stroke_space()
    _WORKER_STATE["templates"] = default_templates()
    _WORKER_STATE["args"] = (master_seed, class_id, rotation, jitter)


def _worker_make(index: int) -> SampleRecord:
    master_seed, class_id, rotation, jitter = _WORKER_STATE["args"]
    return make_record(_WORKER_STATE["space"], _WORKER_STATE["templates"],
                       master_seed, index, class_id=class_id,
                       rotation=rotation, jitter=jitter)


def generate_records(space: GeneratorSpace, templates, master_seed: int,
                     count: int, *, class_id=None, rotation: bool = False,
                     jitter: bool = True, workers: int = 1) -> list[SampleRecord]:
    """Generate ``count`` samples, index order, merge-stable across workers.

    Worker processes rebuild the default space and templates; custom
    spaces or templates therefore require ``workers == 1``.
    """
    if workers <= 1:
        return [
            make_record(space, templates, master_seed, i, class_id=class_id,
                        rotation=rotation, jitter=jitter)
            for i in range(count)
        ]
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_worker_init,
        initargs=(master_seed, class_id, rotation, jitter),
    ) as pool:
        return list(pool.map(_worker_make, range(count), chunksize=64))


def reconstruct(space: GeneratorSpace, y_g: np.ndarray, y_s: np.ndarray,
                steps=None) -> np.ndarray:
    """Grow the configuration encoded by label lattices and render it.

    ``steps=None`` grows to a fixed point under the default 12-step cap.
    """
    y_g = np.asarray(y_g)
    y_s = np.asarray(y_s)
    if y_g.shape != y_s.shape or y_g.ndim != 2:
        raise DimensionMismatch("label lattices must be matching 2-D grids")
    if y_g.min() < 0 or y_g.max() >= space.row_count:
        raise LabelOutOfRange(f"y_g values must lie in 0..{space.row_count - 1}")
    if y_s.min() < 1 or y_s.max() > space.bsg_order:
        raise LabelOutOfRange(f"y_s values must lie in 1..{space.bsg_order}")
    s = np.where(y_g == 0, 1, y_s)
    c0 = Configuration(alpha=y_g.astype(np.int16), s=s.astype(np.int16))
    cap = 12 if steps is None else steps
    budget = y_g.shape[0] * y_g.shape[1] if steps is None else steps
    grown, _ = develop(space, c0, GrowthRule("modified", step_cap=cap), budget)
    return _render_grid(grown)


def spatial_distribution(space: GeneratorSpace, templates, n_samples: int,
                         master_seed: int, *, jitter: bool = True) -> np.ndarray:
    """Per-site frequency of holding a seed, classes drawn uniformly."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    counts = np.zeros((LATTICE, LATTICE), dtype=np.float64)
    for i in range(n_samples):
        class_word, sample_seed = sample_words(master_seed, i)
        rng = np.random.default_rng(sample_seed)
        template = next(t for t in templates if t.class_id == class_word % 10)
        shift = (0, 0)
        if jitter:
            dr, dc = rng.integers(-JITTER_RANGE, JITTER_RANGE + 1, size=2)
            shift = _clamped_shift(template, int(dr), int(dc))
        for r, c, _ in template.seeds:
            counts[r + shift[0], c + shift[1]] += 1.0
    return counts / n_samples
