"""Procedural scene content and randomized scene sampling.

The base scene holds five strawberry models (four ripe, one unripe) plus
leaves and a ground plane.  Each generated scene varies three things:
fruit pose within a central region, one of three lighting modes, and a
camera on a fixed ring of yaw angles aimed at the region center.

Everything here is a pure function of its arguments; per-scene seeds are
hashed from (master_seed, scene_index) so scenes can be produced in any
order, on any number of workers, with identical results.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import Iterable

import numpy as np

from .errors import InvalidConfigError
from .geometry import (
    CLASS_BACKGROUND,
    CLASS_RIPE,
    CLASS_UNRIPE,
    Camera,
    Material,
    Pose,
    Quaternion,
    TriMesh,
    Vec3,
    make_camera,
)
from .rng import derive_seed, generator

RIPE = "ripe"
UNRIPE = "unripe"

# Lathe resolution for the fruit body.
PROFILE_POINTS = 16
REVOLUTION_SEGMENTS = 24


@dataclass(frozen=True)
class StrawberryModel:
    """One of the five fruit models making up the base scene."""

    model_id: int
    ripeness: str  # "ripe" | "unripe"
    base_color: tuple[float, float, float]
    texture_seed: int
    size_scale: float

    def __post_init__(self):
        if self.ripeness not in (RIPE, UNRIPE):
            raise ValueError(f"unknown ripeness: {self.ripeness}")
        if self.size_scale <= 0:
            raise ValueError("size_scale must be positive")
        r, g, b = self.base_color
        if self.ripeness == RIPE and not (r > g and r > b):
            raise ValueError("ripe base color must be red-dominant")
        if self.ripeness == UNRIPE and not (g > r and g > b):
            raise ValueError("unripe base color must be green-dominant")

    @property
    def class_id(self) -> int:
        return CLASS_RIPE if self.ripeness == RIPE else CLASS_UNRIPE


def default_models() -> tuple[StrawberryModel, ...]:
    """The five base models: ids 0-3 ripe with distinct reds/sizes, 4 unripe."""
    return (
        StrawberryModel(0, RIPE, (0.80, 0.10, 0.12), texture_seed=101, size_scale=3.4),
        StrawberryModel(1, RIPE, (0.74, 0.14, 0.12), texture_seed=102, size_scale=2.8),
        StrawberryModel(2, RIPE, (0.82, 0.16, 0.10), texture_seed=103, size_scale=3.9),
        StrawberryModel(3, RIPE, (0.70, 0.09, 0.16), texture_seed=104, size_scale=2.5),
        StrawberryModel(4, UNRIPE, (0.34, 0.58, 0.22), texture_seed=105, size_scale=3.0),
    )


@dataclass(frozen=True)
class LightingMode:
    """Directional light: unit direction pointing *toward* the light."""

    name: str
    direction: Vec3
    intensity: float

    def __post_init__(self):
        n = self.direction.norm()
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"light direction must be unit length, |d|={n}")
        if self.intensity <= 0:
            raise ValueError("light intensity must be positive")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "direction": [self.direction.x, self.direction.y, self.direction.z],
            "intensity": self.intensity,
        }

    @staticmethod
    def from_dict(d: dict) -> "LightingMode":
        return LightingMode(d["name"], Vec3(*d["direction"]), d["intensity"])


_SIDE = 1.0 / math.sqrt(2.0)


def default_lighting_modes() -> tuple[LightingMode, ...]:
    """Strong overhead, moderate overhead, moderate 45-degree side light."""
    return (
        LightingMode("strong_central", Vec3(0.0, 1.0, 0.0), 1.0),
        LightingMode("moderate_central", Vec3(0.0, 1.0, 0.0), 0.6),
        LightingMode("moderate_side", Vec3(_SIDE, _SIDE, 0.0), 0.6),
    )


@dataclass(frozen=True)
class Box3:
    """Axis-aligned box; fruit translations are sampled inside it."""

    lo: Vec3
    hi: Vec3

    def __post_init__(self):
        if not (self.lo.x <= self.hi.x and self.lo.y <= self.hi.y and self.lo.z <= self.hi.z):
            raise InvalidConfigError(f"empty box range: {self.lo} .. {self.hi}")

    def contains(self, p: Vec3, tol: float = 0.0) -> bool:
        return (
            self.lo.x - tol <= p.x <= self.hi.x + tol
            and self.lo.y - tol <= p.y <= self.hi.y + tol
            and self.lo.z - tol <= p.z <= self.hi.z + tol
        )

    @property
    def center(self) -> Vec3:
        return Vec3(
            (self.lo.x + self.hi.x) / 2, (self.lo.y + self.hi.y) / 2, (self.lo.z + self.hi.z) / 2
        )

    def to_dict(self) -> dict:
        return {"lo": [self.lo.x, self.lo.y, self.lo.z], "hi": [self.hi.x, self.hi.y, self.hi.z]}

    @staticmethod
    def from_dict(d: dict) -> "Box3":
        return Box3(Vec3(*d["lo"]), Vec3(*d["hi"]))


def _pose_to_dict(pose: Pose) -> dict:
    q, t = pose.rotation, pose.translation
    return {"rotation": [q.w, q.x, q.y, q.z], "translation": [t.x, t.y, t.z]}


def _pose_from_dict(d: dict) -> Pose:
    return Pose(Quaternion(*d["rotation"]), Vec3(*d["translation"]))


@dataclass(frozen=True)
class SceneSpec:
    """Fully deterministic description of one scene (the seed->image contract)."""

    scene_seed: int
    placements: tuple[tuple[int, Pose], ...]  # (model_id, pose), one per model
    leaf_placements: tuple[tuple[int, float, Pose], ...]  # (leaf_seed, scale, pose)
    lighting: LightingMode
    camera_index: int
    region: Box3

    def to_dict(self) -> dict:
        return {
            "scene_seed": self.scene_seed,
            "placements": [
                {"model_id": mid, "pose": _pose_to_dict(p)} for mid, p in self.placements
            ],
            "leaf_placements": [
                {"leaf_seed": s, "scale": sc, "pose": _pose_to_dict(p)}
                for s, sc, p in self.leaf_placements
            ],
            "lighting": self.lighting.to_dict(),
            "camera_index": self.camera_index,
            "region": self.region.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "SceneSpec":
        return SceneSpec(
            scene_seed=d["scene_seed"],
            placements=tuple(
                (p["model_id"], _pose_from_dict(p["pose"])) for p in d["placements"]
            ),
            leaf_placements=tuple(
                (p["leaf_seed"], p["scale"], _pose_from_dict(p["pose"]))
                for p in d["leaf_placements"]
            ),
            lighting=LightingMode.from_dict(d["lighting"]),
            camera_index=d["camera_index"],
            region=Box3.from_dict(d["region"]),
        )


CAPTURE_ALL = "all"  # every (viewpoint, lighting) combination per scene
CAPTURE_SINGLE = "single"  # one sampled (viewpoint, lighting) per scene


@dataclass(frozen=True)
class GenerationConfig:
    """Everything the generator needs; serializes to an editable JSON file."""

    master_seed: int = 0
    target_image_count: int = 3500
    image_width: int = 500
    image_height: int = 500
    region: Box3 = field(default_factory=lambda: Box3(Vec3(-7.0, 0.8, -7.0), Vec3(7.0, 3.2, 7.0)))
    max_tilt_deg: float = 35.0
    leaf_count: tuple[int, int] = (0, 3)
    leaf_scale: tuple[float, float] = (0.8, 1.6)
    camera_yaws_deg: tuple[float, ...] = (-60.0, -30.0, 0.0, 30.0, 60.0)
    camera_elevation_deg: float = 35.0
    camera_radius: float = 25.0
    camera_vfov_deg: float = 50.0
    capture_policy: str = CAPTURE_ALL
    min_visibility: float = 0.25

    def __post_init__(self):
        if self.target_image_count <= 0:
            raise InvalidConfigError("target_image_count must be positive")
        if self.image_width <= 0 or self.image_height <= 0:
            raise InvalidConfigError("image size must be positive")
        if not 0.0 <= self.max_tilt_deg <= 180.0:
            raise InvalidConfigError("max_tilt_deg must be in [0, 180]")
        if self.leaf_count[0] > self.leaf_count[1] or self.leaf_count[0] < 0:
            raise InvalidConfigError(f"bad leaf count range: {self.leaf_count}")
        if self.leaf_scale[0] > self.leaf_scale[1] or self.leaf_scale[0] <= 0:
            raise InvalidConfigError(f"bad leaf scale range: {self.leaf_scale}")
        if len(self.camera_yaws_deg) == 0:
            raise InvalidConfigError("camera ring needs at least one yaw angle")
        if self.camera_radius <= 0:
            raise InvalidConfigError("camera_radius must be positive")
        if self.capture_policy not in (CAPTURE_ALL, CAPTURE_SINGLE):
            raise InvalidConfigError(f"unknown capture policy: {self.capture_policy}")
        if not 0.0 <= self.min_visibility <= 1.0:
            raise InvalidConfigError("min_visibility must be in [0, 1]")

    @property
    def lighting_modes(self) -> tuple[LightingMode, ...]:
        return default_lighting_modes()

    def captures_per_scene(self) -> int:
        if self.capture_policy == CAPTURE_SINGLE:
            return 1
        return len(self.camera_yaws_deg) * len(self.lighting_modes)

    def scene_count(self) -> int:
        return -(-self.target_image_count // self.captures_per_scene())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["region"] = self.region.to_dict()
        d["leaf_count"] = list(self.leaf_count)
        d["leaf_scale"] = list(self.leaf_scale)
        d["camera_yaws_deg"] = list(self.camera_yaws_deg)
        return d

    @staticmethod
    def from_dict(d: dict) -> "GenerationConfig":
        known = {f for f in GenerationConfig.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(d)
        if "region" in kw:
            kw["region"] = Box3.from_dict(kw["region"])
        for key in ("leaf_count", "leaf_scale", "camera_yaws_deg"):
            if key in kw:
                kw[key] = tuple(kw[key])
        return GenerationConfig(**kw)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "GenerationConfig":
        return GenerationConfig.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# mesh construction


def _lathe(profile_r: np.ndarray, profile_y: np.ndarray, segments: int) -> tuple[np.ndarray, np.ndarray]:
    """Revolve a profile (r_k, y_k) about +y.  First/last profile points must
    have r == 0 (the poles).  Returns (vertices, triangles) with outward
    winding (CCW seen from outside)."""
    n = len(profile_r)
    assert profile_r[0] == 0.0 and profile_r[-1] == 0.0
    verts = [np.array([0.0, profile_y[0], 0.0])]
    for k in range(1, n - 1):
        for j in range(segments):
            th = 2.0 * math.pi * j / segments
            verts.append(
                np.array(
                    [profile_r[k] * math.cos(th), profile_y[k], profile_r[k] * math.sin(th)]
                )
            )
    verts.append(np.array([0.0, profile_y[-1], 0.0]))
    verts = np.asarray(verts)
    bottom = len(verts) - 1

    def ring(k, j):  # k in 1..n-2
        return 1 + (k - 1) * segments + (j % segments)

    tris = []
    for j in range(segments):
        tris.append((0, ring(1, j + 1), ring(1, j)))
    for k in range(1, n - 2):
        for j in range(segments):
            a, b = ring(k, j), ring(k, j + 1)
            c, d = ring(k + 1, j), ring(k + 1, j + 1)
            tris.append((a, b, d))
            tris.append((a, d, c))
    for j in range(segments):
        tris.append((bottom, ring(n - 2, j), ring(n - 2, j + 1)))
    return verts, np.asarray(tris, dtype=np.int32)


def _speckled_materials(rng: np.random.Generator, base: tuple[float, float, float],
                        jitter: float, count: int, ambient: float) -> tuple[Material, ...]:
    mats = []
    for _ in range(count):
        c = np.clip(np.asarray(base) + rng.uniform(-jitter, jitter, 3), 0.0, 1.0)
        mats.append(Material(albedo=tuple(float(v) for v in c), ambient=ambient))
    return tuple(mats)


def build_strawberry_mesh(model: StrawberryModel) -> TriMesh:
    """Closed lathed teardrop with seeded radial bumps and speckled color.

    The profile is widest above the equator (calyx end up) and tapers to a
    tip at the bottom; bump amplitude and color jitter vary per model so
    the four ripe berries read as slightly different.
    """
    rng = generator("strawberry", model.texture_seed)
    n, segs = PROFILE_POINTS, REVOLUTION_SEGMENTS
    phi = np.linspace(0.0, math.pi, n)
    base_r = np.sin(phi) * (1.0 + 0.30 * np.cos(phi))
    base_r[0] = base_r[-1] = 0.0  # exact poles (sin(pi) != 0 in floats)
    base_r *= 0.5 * model.size_scale / base_r.max()
    prof_y = 0.55 * model.size_scale * np.cos(phi)

    bump_amp = 0.03 + 0.02 * ((model.texture_seed * 7) % 5) / 4.0
    verts, tris = _lathe(base_r, prof_y, segs)
    # radial bumps on interior rings only (poles stay fixed so the mesh stays closed)
    interior = verts[1:-1].copy()
    radial = interior.copy()
    radial[:, 1] = 0.0
    r = np.linalg.norm(radial, axis=1, keepdims=True)
    bump = 1.0 + bump_amp * rng.uniform(-1.0, 1.0, (len(interior), 1))
    interior[:, [0, 2]] *= bump
    verts = np.vstack([verts[:1], interior, verts[-1:]])

    mats = _speckled_materials(rng, model.base_color, jitter=0.05, count=6, ambient=0.3)
    face_material = rng.integers(0, len(mats), len(tris)).astype(np.int32)
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=face_material,
        materials=mats,
        class_id=model.class_id,
        double_sided=False,
    )


def build_leaf_mesh(leaf_seed: int, scale: float = 1.0) -> TriMesh:
    """Thin serrated leaf: a planar fan with a gentle arch, green materials."""
    rng = generator("leaf", leaf_seed)
    length = 5.0 * scale * rng.uniform(0.85, 1.15)
    width = 2.4 * scale * rng.uniform(0.75, 1.25)
    n_outline = 14
    t = np.linspace(0.0, 1.0, n_outline // 2)
    half_w = width * np.sin(np.pi * t) ** 0.7
    serr = 1.0 + 0.12 * rng.uniform(-1.0, 1.0, len(t))
    arch = 0.12 * length * np.sin(np.pi * t)
    top = np.stack([t * length, arch, half_w * serr], axis=1)
    serr2 = 1.0 + 0.12 * rng.uniform(-1.0, 1.0, len(t))
    bot = np.stack([t * length, arch, -half_w * serr2], axis=1)[::-1]
    outline = np.vstack([top, bot])
    centroid = outline.mean(axis=0, keepdims=True)
    verts = np.vstack([centroid, outline])
    m = len(outline)
    tris = np.array([(0, 1 + i, 1 + (i + 1) % m) for i in range(m)], dtype=np.int32)

    base = (0.18 + 0.08 * float(rng.uniform()), 0.50 + 0.10 * float(rng.uniform()), 0.16)
    mats = _speckled_materials(rng, base, jitter=0.04, count=3, ambient=0.35)
    face_material = rng.integers(0, len(mats), len(tris)).astype(np.int32)
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=face_material,
        materials=mats,
        class_id=CLASS_BACKGROUND,
        double_sided=True,
    )


def build_ground_mesh(seed: int, extent: float = 60.0, cells: int = 12) -> TriMesh:
    """Large ground grid at y=0 with seeded brown/green patchwork."""
    rng = generator("ground", seed)
    xs = np.linspace(-extent, extent, cells + 1)
    zs = np.linspace(-extent, extent, cells + 1)
    verts = np.array([[x, 0.0, z] for x in xs for z in zs])

    def vid(i, j):
        return i * (cells + 1) + j

    tris = []
    for i in range(cells):
        for j in range(cells):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            # upward normals (+y): counter-clockwise seen from above
            tris.append((a, d, c))
            tris.append((a, c, b))
    tris = np.asarray(tris, dtype=np.int32)

    brown = np.array([0.36, 0.26, 0.16])
    green = np.array([0.24, 0.38, 0.16])
    mats = []
    for _ in range(8):
        mix = rng.uniform(0.0, 1.0)
        c = brown * (1 - mix) + green * mix + rng.uniform(-0.03, 0.03, 3)
        mats.append(Material(albedo=tuple(float(v) for v in np.clip(c, 0, 1)), ambient=0.45))
    face_material = rng.integers(0, len(mats), len(tris)).astype(np.int32)
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=face_material,
        materials=tuple(mats),
        class_id=CLASS_BACKGROUND,
        double_sided=True,
    )


# ---------------------------------------------------------------------------
# sampling


def _sample_orientation(rng: np.random.Generator, max_tilt_deg: float) -> Quaternion:
    yaw = rng.uniform(0.0, 2.0 * math.pi)
    tilt = math.radians(rng.uniform(0.0, max_tilt_deg))
    azim = rng.uniform(0.0, 2.0 * math.pi)
    q_yaw = Quaternion.from_axis_angle(Vec3(0.0, 1.0, 0.0), yaw)
    tilt_axis = Vec3(math.cos(azim), 0.0, math.sin(azim))
    q_tilt = Quaternion.from_axis_angle(tilt_axis, tilt)
    return q_yaw * q_tilt


def sample_scene(config: GenerationConfig, scene_index: int) -> SceneSpec:
    """Sample one scene; a pure function of (config, scene_index)."""
    scene_seed = derive_seed(config.master_seed, "scene", scene_index)
    rng = np.random.Generator(np.random.PCG64(scene_seed))
    lo, hi = config.region.lo, config.region.hi

    placements = []
    for model_id in range(5):
        t = Vec3(
            float(rng.uniform(lo.x, hi.x)),
            float(rng.uniform(lo.y, hi.y)),
            float(rng.uniform(lo.z, hi.z)),
        )
        q = _sample_orientation(rng, config.max_tilt_deg)
        placements.append((model_id, Pose(q, t)))

    n_leaves = int(rng.integers(config.leaf_count[0], config.leaf_count[1] + 1))
    leaves = []
    for _ in range(n_leaves):
        leaf_seed = int(rng.integers(0, 2**31 - 1))
        scale = float(rng.uniform(*config.leaf_scale))
        t = Vec3(
            float(rng.uniform(lo.x * 1.1, hi.x * 1.1)),
            float(rng.uniform(max(lo.y, 1.0), hi.y + 2.5)),
            float(rng.uniform(lo.z * 1.1, hi.z * 1.1)),
        )
        q = _sample_orientation(rng, 75.0)
        leaves.append((leaf_seed, scale, Pose(q, t)))

    lighting = config.lighting_modes[int(rng.integers(0, len(config.lighting_modes)))]
    camera_index = int(rng.integers(0, len(config.camera_yaws_deg)))
    return SceneSpec(
        scene_seed=scene_seed,
        placements=tuple(placements),
        leaf_placements=tuple(leaves),
        lighting=lighting,
        camera_index=camera_index,
        region=config.region,
    )


def ring_camera(config: GenerationConfig, yaw_deg: float) -> Camera:
    """Camera on the ring, aimed at the region center."""
    center = config.region.center
    elev = math.radians(config.camera_elevation_deg)
    yaw = math.radians(yaw_deg)
    r = config.camera_radius
    eye = Vec3(
        center.x + r * math.cos(elev) * math.sin(yaw),
        center.y + r * math.sin(elev),
        center.z + r * math.cos(elev) * math.cos(yaw),
    )
    return make_camera(
        eye, center, Vec3(0.0, 1.0, 0.0), config.camera_vfov_deg,
        config.image_width, config.image_height,
    )


def capture_plan(config: GenerationConfig, spec: SceneSpec) -> list[tuple[Camera, LightingMode]]:
    """The (camera, lighting) captures to render for one scene.

    Default policy renders every viewpoint under every lighting mode
    (5 x 3 = 15 captures); the "single" policy uses the scene's own
    sampled camera index and lighting mode.
    """
    if config.capture_policy == CAPTURE_SINGLE:
        cam = ring_camera(config, config.camera_yaws_deg[spec.camera_index])
        return [(cam, spec.lighting)]
    plan = []
    for yaw in config.camera_yaws_deg:
        cam = ring_camera(config, yaw)
        for mode in config.lighting_modes:
            plan.append((cam, mode))
    return plan
