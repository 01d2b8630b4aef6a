"""Vectors, rigid poses, triangle meshes, and a pinhole camera.

Conventions (fixed so that golden images are reproducible):
  * world and view space are right-handed, +y up; the camera looks down
    its local -z axis
  * pixel space has its origin at the top-left corner, x right, y down;
    pixel (i, j) covers the half-open square [i, i+1) x [j, j+1) and is
    sampled at its center (i + 0.5, j + 0.5)
  * one scene unit is nominally 1 cm (convention only)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import BehindCameraError, InvalidCameraError, OffScreenError

CLASS_RIPE = 0
CLASS_UNRIPE = 1
CLASS_BACKGROUND = 255


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError(f"non-finite vector components: {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Vec3":
        return Vec3(float(a[0]), float(a[1]), float(a[2]))

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z) for orientations."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Quaternion":
        return Quaternion(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_axis_angle(axis: Vec3, angle_rad: float) -> "Quaternion":
        n = axis.norm()
        if n == 0.0:
            raise ValueError("rotation axis must be nonzero")
        h = 0.5 * angle_rad
        s = math.sin(h) / n
        return Quaternion(math.cos(h), axis.x * s, axis.y * s, axis.z * s)

    def norm(self) -> float:
        return math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)

    def normalized(self) -> "Quaternion":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    def __mul__(self, o: "Quaternion") -> "Quaternion":
        # Hamilton product; renormalized to keep drift out of long compositions.
        w = self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z
        x = self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y
        y = self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x
        z = self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w
        return Quaternion(w, x, y, z).normalized()

    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ],
            dtype=np.float64,
        )


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotate by a unit quaternion, then translate."""

    rotation: Quaternion
    translation: Vec3

    def __post_init__(self):
        if abs(self.rotation.norm() - 1.0) > 1e-9:
            raise ValueError(f"pose rotation must be a unit quaternion, |q|={self.rotation.norm()}")

    @staticmethod
    def identity() -> "Pose":
        return Pose(Quaternion.identity(), Vec3(0.0, 0.0, 0.0))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (N, 3) array of points."""
        r = self.rotation.rotation_matrix()
        return points @ r.T + self.translation.as_array()


@dataclass(frozen=True)
class Material:
    """Flat-shaded surface color: albedo scaled by ambient + diffuse light."""

    albedo: tuple[float, float, float]
    ambient: float = 0.25

    def __post_init__(self):
        if not all(0.0 <= c <= 1.0 for c in self.albedo):
            raise ValueError(f"albedo channels must be in [0,1]: {self.albedo}")
        if not 0.0 <= self.ambient <= 1.0:
            raise ValueError(f"ambient coefficient must be in [0,1]: {self.ambient}")


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh with per-face materials and per-object identity.

    ``class_id`` is 0 for ripe fruit, 1 for unripe fruit, 255 for
    background geometry (leaves, ground) that is never labeled.
    Meshes with ``double_sided=False`` are closed surfaces whose back
    faces the rasterizer may cull.
    """

    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int32 indices into vertices
    face_material: np.ndarray  # (T,) int32 indices into materials
    materials: tuple[Material, ...]
    instance_id: int = 0
    class_id: int = CLASS_BACKGROUND
    double_sided: bool = True

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        t = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int32))
        fm = np.ascontiguousarray(np.asarray(self.face_material, dtype=np.int32))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ValueError(f"vertices must be (V, 3), got {v.shape}")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError(f"triangles must be (T, 3), got {t.shape}")
        if fm.shape != (t.shape[0],):
            raise ValueError("face_material must have one entry per triangle")
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh vertices must be finite")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle indices out of range")
        if fm.size and (fm.min() < 0 or fm.max() >= len(self.materials)):
            raise ValueError("face material indices out of range")
        if self.instance_id < 0:
            raise ValueError("instance_id must be non-negative")
        for arr in (v, t, fm):
            arr.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "face_material", fm)
        object.__setattr__(self, "materials", tuple(self.materials))

    def with_identity(self, instance_id: int, class_id: int | None = None) -> "TriMesh":
        return replace(
            self,
            instance_id=instance_id,
            class_id=self.class_id if class_id is None else class_id,
        )

    def face_albedos(self) -> np.ndarray:
        """(T, 3) float albedo per face, resolved through the material table."""
        table = np.array([m.albedo for m in self.materials], dtype=np.float64)
        return table[self.face_material]


@dataclass(frozen=True)
class BBox2D:
    """Axis-aligned pixel box, inclusive-min / exclusive-max."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def hull(self, other: "BBox2D") -> "BBox2D":
        return BBox2D(
            min(self.x_min, other.x_min),
            min(self.y_min, other.y_min),
            max(self.x_max, other.x_max),
            max(self.y_max, other.y_max),
        )


@dataclass(frozen=True)
class Camera:
    """Pinhole camera defined by a look-at pose and a vertical FOV."""

    eye: Vec3
    target: Vec3
    up: Vec3
    vertical_fov_deg: float
    width: int
    height: int

    def __post_init__(self):
        if not 0.0 < self.vertical_fov_deg < 180.0:
            raise InvalidCameraError(f"vertical fov must be in (0, 180): {self.vertical_fov_deg}")
        if self.width < 1 or self.height < 1:
            raise InvalidCameraError(f"image size must be positive: {self.width}x{self.height}")
        forward = (self.target - self.eye).as_array()
        fnorm = np.linalg.norm(forward)
        if fnorm < 1e-12:
            raise InvalidCameraError("eye and target coincide")
        upv = self.up.as_array()
        unorm = np.linalg.norm(upv)
        if unorm < 1e-12:
            raise InvalidCameraError("up vector is zero")
        side = np.cross(upv / unorm, -forward / fnorm)
        if np.linalg.norm(side) < 1e-9:
            raise InvalidCameraError("up vector is parallel to the view axis")

    @cached_property
    def view_rotation(self) -> np.ndarray:
        """Rows are the camera basis (right, up, backward) in world space."""
        backward = (self.eye - self.target).as_array()
        backward /= np.linalg.norm(backward)
        right = np.cross(self.up.as_array(), backward)
        right /= np.linalg.norm(right)
        true_up = np.cross(backward, right)
        return np.stack([right, true_up, backward])

    @cached_property
    def tan_half_fov(self) -> float:
        return math.tan(math.radians(self.vertical_fov_deg) * 0.5)

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def to_view(self, points: np.ndarray) -> np.ndarray:
        """World points (N, 3) -> view space (camera at origin, looking -z)."""
        return (np.atleast_2d(points) - self.eye.as_array()) @ self.view_rotation.T


def make_camera(
    eye: Vec3, target: Vec3, up: Vec3, vfov_deg: float, width: int, height: int
) -> Camera:
    """Build a validated camera looking from ``eye`` toward ``target``."""
    return Camera(eye, target, up, vfov_deg, width, height)


def project_points(camera: Camera, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project (N, 3) world points to continuous pixel coordinates.

    Returns ``(pixels (N, 2), depth (N,))`` where depth is the view-space
    distance along the view axis.  Points at or behind the camera get
    non-positive depth and garbage pixel coordinates; callers must filter.
    """
    view = camera.to_view(points)
    depth = -view[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        ndc_x = view[:, 0] / (depth * camera.tan_half_fov * camera.aspect)
        ndc_y = view[:, 1] / (depth * camera.tan_half_fov)
    px = (ndc_x + 1.0) * 0.5 * camera.width
    py = (1.0 - ndc_y) * 0.5 * camera.height
    return np.stack([px, py], axis=1), depth


def project(camera: Camera, p: Vec3) -> tuple[float, float, float]:
    """Project one world point; raises if it is at or behind the camera."""
    pix, depth = project_points(camera, p.as_array()[None, :])
    d = float(depth[0])
    if d <= 0.0:
        raise BehindCameraError(f"point {p} has view depth {d}")
    return float(pix[0, 0]), float(pix[0, 1]), d


def apply_pose(mesh: TriMesh, pose: Pose) -> TriMesh:
    """Rigidly transform a mesh; topology, materials, ids are untouched."""
    return replace(mesh, vertices=pose.apply(mesh.vertices))


def projected_bbox(camera: Camera, mesh: TriMesh) -> BBox2D:
    """Axis-aligned pixel bounds of all projected vertices, clamped to the image.

    Raises BehindCameraError if any vertex is at or behind the camera and
    OffScreenError if the clamped box is empty.
    """
    pix, depth = project_points(camera, mesh.vertices)
    if np.any(depth <= 0.0):
        raise BehindCameraError("mesh has vertices at or behind the camera")
    x_min = max(float(pix[:, 0].min()), 0.0)
    y_min = max(float(pix[:, 1].min()), 0.0)
    x_max = min(float(pix[:, 0].max()), float(camera.width))
    y_max = min(float(pix[:, 1].max()), float(camera.height))
    if not (x_min < x_max and y_min < y_max):
        raise OffScreenError("projected bounds fall outside the image")
    return BBox2D(x_min, y_min, x_max, y_max)


def mesh_from_lists(
    vertices: Sequence[Vec3] | np.ndarray,
    triangles: Sequence[tuple[int, int, int]],
    material: Material,
    **kwargs,
) -> TriMesh:
    """Convenience constructor: single material for every face."""
    if len(vertices) and isinstance(vertices[0], Vec3):
        verts = np.array([[v.x, v.y, v.z] for v in vertices], dtype=np.float64)
    else:
        verts = np.asarray(vertices, dtype=np.float64)
    tris = np.asarray(triangles, dtype=np.int32).reshape(-1, 3)
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=np.zeros(len(tris), dtype=np.int32),
        materials=(material,),
        **kwargs,
    )
