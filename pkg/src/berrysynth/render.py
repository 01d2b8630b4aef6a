"""Deterministic software rasterizer: RGB + depth + instance-id rasters.

Rendering rules, fixed for bit-exact reproducibility:
  * z-buffered triangle rasterization, flat (per-face) Lambertian shading
  * pixel centers sampled at (x + 0.5, y + 0.5) with a top-left fill rule,
    so a pixel on a shared edge is owned by exactly one triangle
  * triangles crossing the near plane are clipped, not dropped
  * no shadows, anti-aliasing, or gamma; the sky is a flat fill

The per-pixel fill loop is compiled with numba when available (it is a
declared dependency); the same function runs as plain Python otherwise,
with identical results.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InvalidSettingsError
from .geometry import Camera, Material, TriMesh, Vec3
from .scenegen import LightingMode

NONE_INSTANCE = -1


@dataclass
class FrameBuffer:
    """RGB + depth + instance rasters sharing one resolution.

    ``instance[y, x] == NONE_INSTANCE`` exactly where no surface was hit,
    in which case ``depth[y, x] == +inf``.
    """

    width: int
    height: int
    rgb: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64, +inf where empty
    instance: np.ndarray  # (H, W) int32, NONE_INSTANCE where empty

    @staticmethod
    def empty(width: int, height: int, sky_color=(158, 196, 222)) -> "FrameBuffer":
        if width <= 0 or height <= 0:
            raise InvalidSettingsError(f"framebuffer must have positive area: {width}x{height}")
        rgb = np.empty((height, width, 3), dtype=np.uint8)
        rgb[:] = np.asarray(sky_color, dtype=np.uint8)
        return FrameBuffer(
            width=width,
            height=height,
            rgb=rgb,
            depth=np.full((height, width), np.inf, dtype=np.float64),
            instance=np.full((height, width), NONE_INSTANCE, dtype=np.int32),
        )

    def instance_pixel_count(self, instance_id: int) -> int:
        return int(np.count_nonzero(self.instance == instance_id))


@dataclass(frozen=True)
class RenderSettings:
    near: float = 1e-3  # near-plane depth; crossing triangles are clipped here
    sky_color: tuple[int, int, int] = (158, 196, 222)
    shade: bool = True  # False skips RGB writes (instance/depth only)


def shade(normal: Vec3, material: Material, light: LightingMode) -> tuple[float, float, float]:
    """Flat Lambertian: albedo x clamp(ambient + intensity * max(0, n.l), 0, 1)."""
    n = normal.norm()
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"shading normal must be unit length, |n|={n}")
    l = light.direction
    cos = normal.x * l.x + normal.y * l.y + normal.z * l.z
    factor = material.ambient + light.intensity * max(0.0, cos)
    factor = min(max(factor, 0.0), 1.0)
    return (
        material.albedo[0] * factor,
        material.albedo[1] * factor,
        material.albedo[2] * factor,
    )


def _fill_triangles(xy, iz, tie, colors, instance_id, depth, inst, rgb, write_rgb):
    """Fill canonically-wound triangles into the buffers (serial, per pixel).

    xy: (K, 3, 2) pixel coords, positive signed area ordering
    iz: (K, 3) inverse view depth at the vertices
    tie: (K, 3) top-left ownership flag per edge (edge i is opposite vertex i)
    colors: (K, 3) uint8 flat face colors
    """
    h, w = depth.shape
    for t in range(xy.shape[0]):
        ax, ay = xy[t, 0, 0], xy[t, 0, 1]
        bx, by = xy[t, 1, 0], xy[t, 1, 1]
        cx, cy = xy[t, 2, 0], xy[t, 2, 1]
        area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
        if area <= 0.0:
            continue
        lo_x = min(ax, min(bx, cx))
        hi_x = max(ax, max(bx, cx))
        lo_y = min(ay, min(by, cy))
        hi_y = max(ay, max(by, cy))
        x0 = int(math.ceil(lo_x - 0.5))
        x1 = int(math.floor(hi_x - 0.5)) + 1
        y0 = int(math.ceil(lo_y - 0.5))
        y1 = int(math.floor(hi_y - 0.5)) + 1
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if x1 > w:
            x1 = w
        if y1 > h:
            y1 = h
        iza, izb, izc = iz[t, 0], iz[t, 1], iz[t, 2]
        t0, t1, t2 = tie[t, 0], tie[t, 1], tie[t, 2]
        for yy in range(y0, y1):
            py = yy + 0.5
            for xx in range(x0, x1):
                px = xx + 0.5
                w0 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
                if w0 < 0.0 or (w0 == 0.0 and not t0):
                    continue
                w1 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
                if w1 < 0.0 or (w1 == 0.0 and not t1):
                    continue
                w2 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                if w2 < 0.0 or (w2 == 0.0 and not t2):
                    continue
                izp = (w0 * iza + w1 * izb + w2 * izc) / area
                if izp <= 0.0:
                    continue
                d = 1.0 / izp
                if d < depth[yy, xx]:
                    depth[yy, xx] = d
                    inst[yy, xx] = instance_id
                    if write_rgb:
                        rgb[yy, xx, 0] = colors[t, 0]
                        rgb[yy, xx, 1] = colors[t, 1]
                        rgb[yy, xx, 2] = colors[t, 2]


try:  # the kernel dominates runtime; jit it when numba is importable
    import numba

    _fill_triangles = numba.njit(cache=True)(_fill_triangles)
except Exception:  # pragma: no cover - exercised only without numba
    pass


def _pixels_from_view(view: np.ndarray, camera: Camera) -> np.ndarray:
    d = -view[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        px = (view[:, 0] / (d * camera.tan_half_fov * camera.aspect) + 1.0) * 0.5 * camera.width
        py = (1.0 - view[:, 1] / (d * camera.tan_half_fov)) * 0.5 * camera.height
    return np.stack([px, py], axis=1)


def _clip_near(tri_view: np.ndarray, near: float) -> list[np.ndarray]:
    """Sutherland-Hodgman clip of one view-space triangle against z <= -near."""
    out: list[np.ndarray] = []
    for i in range(3):
        cur, nxt = tri_view[i], tri_view[(i + 1) % 3]
        cur_in, nxt_in = cur[2] <= -near, nxt[2] <= -near
        if cur_in:
            out.append(cur)
        if cur_in != nxt_in:
            t = (-near - cur[2]) / (nxt[2] - cur[2])
            out.append(cur + t * (nxt - cur))
    return out


def _face_colors(mesh: TriMesh, light: LightingMode) -> np.ndarray:
    """Quantized flat-shaded color per face; the vector form of shade()."""
    v = mesh.vertices
    t = mesh.triangles
    n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    norm = np.linalg.norm(n, axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        n = np.where(norm > 0, n / norm, 0.0)
    ldir = light.direction.as_array()
    cos = np.maximum(0.0, n @ ldir)
    ambient = np.array([m.ambient for m in mesh.materials])[mesh.face_material]
    factor = np.clip(ambient + light.intensity * cos, 0.0, 1.0)
    rgb = mesh.face_albedos() * factor[:, None]
    return np.floor(rgb * 255.0 + 0.5).astype(np.uint8)


def _edge_tie_flags(xy: np.ndarray) -> np.ndarray:
    """Top-left ownership per edge; edge i runs opposite vertex i."""
    # edge order mirrors the kernel: (b->c, c->a, a->b)
    starts = xy[:, [1, 2, 0], :]
    ends = xy[:, [2, 0, 1], :]
    d = ends - starts
    dx, dy = d[..., 0], d[..., 1]
    return (dy < 0.0) | ((dy == 0.0) & (dx > 0.0))


def rasterize(
    meshes: Sequence[TriMesh],
    camera: Camera,
    light: LightingMode,
    settings: RenderSettings = RenderSettings(),
) -> FrameBuffer:
    """Render meshes into a fresh framebuffer; nearest surface wins each pixel.

    Output is a pure function of the inputs: serial fill order, fixed
    tie-breaking, no accumulation, so identical calls produce byte-identical
    buffers on any machine and under any surrounding parallelism.
    """
    fb = FrameBuffer.empty(camera.width, camera.height, settings.sky_color)
    ids = [m.instance_id for m in meshes]
    if len(set(ids)) != len(ids):
        raise InvalidSettingsError(f"duplicate instance ids in mesh list: {sorted(ids)}")
    for mesh in meshes:
        if len(mesh.triangles) == 0:
            continue
        view = camera.to_view(mesh.vertices)
        depth = -view[:, 2]
        pix = _pixels_from_view(view, camera)
        inv_depth = np.where(depth > 0, 1.0 / np.where(depth > 0, depth, 1.0), 0.0)
        colors = _face_colors(mesh, light) if settings.shade else np.zeros(
            (len(mesh.triangles), 3), dtype=np.uint8
        )

        tris = mesh.triangles
        front_count = (depth[tris] > settings.near).sum(axis=1)
        full = front_count == 3
        crossing = (front_count > 0) & ~full

        xy_parts = [pix[tris[full]]]
        iz_parts = [inv_depth[tris[full]]]
        color_parts = [colors[full]]

        if crossing.any():
            clipped_xy, clipped_iz, clipped_colors = [], [], []
            for face_idx in np.nonzero(crossing)[0]:
                poly = _clip_near(view[tris[face_idx]], settings.near)
                if len(poly) < 3:
                    continue
                poly = np.asarray(poly)
                ppix = _pixels_from_view(poly, camera)
                piz = 1.0 / (-poly[:, 2])
                for k in range(1, len(poly) - 1):
                    clipped_xy.append(ppix[[0, k, k + 1]])
                    clipped_iz.append(piz[[0, k, k + 1]])
                    clipped_colors.append(colors[face_idx])
            if clipped_xy:
                xy_parts.append(np.asarray(clipped_xy))
                iz_parts.append(np.asarray(clipped_iz))
                color_parts.append(np.asarray(clipped_colors))

        xy = np.concatenate(xy_parts)
        iz = np.concatenate(iz_parts)
        cols = np.concatenate(color_parts)
        if len(xy) == 0:
            continue

        area2 = (xy[:, 1, 0] - xy[:, 0, 0]) * (xy[:, 2, 1] - xy[:, 0, 1]) - (
            xy[:, 1, 1] - xy[:, 0, 1]
        ) * (xy[:, 2, 0] - xy[:, 0, 0])
        if mesh.double_sided:
            keep = area2 != 0.0
        else:
            keep = area2 < 0.0  # negative screen area == front-facing
        xy, iz, cols, area2 = xy[keep], iz[keep], cols[keep], area2[keep]
        swap = area2 < 0.0
        if swap.any():
            xy[swap] = xy[swap][:, [0, 2, 1]]
            iz[swap] = iz[swap][:, [0, 2, 1]]
        tie = _edge_tie_flags(xy)

        _fill_triangles(
            np.ascontiguousarray(xy),
            np.ascontiguousarray(iz),
            tie,
            np.ascontiguousarray(cols),
            mesh.instance_id,
            fb.depth,
            fb.instance,
            fb.rgb,
            settings.shade,
        )
    return fb


def write_image(fb: FrameBuffer, path: str | Path, png_sidecar: bool = False) -> None:
    """Write the RGB raster as binary PPM (P6, maxval 255), bit-exactly."""
    path = Path(path)
    header = f"P6\n{fb.width} {fb.height}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(fb.rgb.tobytes())
    except OSError as e:
        raise OSError(f"failed to write image {path}: {e}") from e
    if png_sidecar:
        from PIL import Image

        Image.fromarray(fb.rgb, mode="RGB").save(path.with_suffix(".png"))


def read_image(path: str | Path) -> np.ndarray:
    """Read a binary PPM written by write_image; returns (H, W, 3) uint8."""
    path = Path(path)
    with open(path, "rb") as f:
        data = f.read()
    if not data.startswith(b"P6"):
        raise ValueError(f"not a binary PPM file: {path}")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":  # comment line
            pos = data.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = (int(x) for x in fields)
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval} in {path}")
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return raster.reshape(height, width, 3).copy()
