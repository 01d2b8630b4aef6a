"""Shared mesh/scene builders for the test suite."""
from __future__ import annotations

import math

import numpy as np
import pytest

from berrysynth.geometry import Material, TriMesh, Vec3, make_camera


def single_material(rgb=(0.8, 0.2, 0.2), ambient=0.25) -> Material:
    return Material(albedo=rgb, ambient=ambient)


def cube_mesh(center=(0.0, 0.0, 0.0), size=1.0, **kwargs) -> TriMesh:
    """Axis-aligned cube, 12 triangles, outward winding."""
    c = np.asarray(center, dtype=np.float64)
    h = size / 2.0
    corners = np.array(
        [[sx, sy, sz] for sx in (-h, h) for sy in (-h, h) for sz in (-h, h)]
    )  # index bits: x<<2 | y<<1 | z
    v = corners + c
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    tris = []
    for a, b, cc, d in quads:
        tris.append((a, b, cc))
        tris.append((a, cc, d))
    tris = np.asarray(tris, dtype=np.int32)
    # flip faces whose normal points toward the cube center
    verts = v
    fixed = []
    for a, b, cc in tris:
        n = np.cross(verts[b] - verts[a], verts[cc] - verts[a])
        mid = (verts[a] + verts[b] + verts[cc]) / 3.0
        if np.dot(n, mid - c) < 0:
            fixed.append((a, cc, b))
        else:
            fixed.append((a, b, cc))
    tris = np.asarray(fixed, dtype=np.int32)
    mat = kwargs.pop("material", single_material())
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=np.zeros(len(tris), dtype=np.int32),
        materials=(mat,),
        **kwargs,
    )


def uv_sphere_mesh(center=(0.0, 0.0, 0.0), radius=1.0, lat=24, lon=48, **kwargs) -> TriMesh:
    """UV sphere with pole fans; inscribed in the true sphere."""
    c = np.asarray(center, dtype=np.float64)
    verts = [c + np.array([0.0, radius, 0.0])]
    for i in range(1, lat):
        phi = math.pi * i / lat
        y = radius * math.cos(phi)
        r = radius * math.sin(phi)
        for j in range(lon):
            th = 2.0 * math.pi * j / lon
            verts.append(c + np.array([r * math.cos(th), y, r * math.sin(th)]))
    verts.append(c + np.array([0.0, -radius, 0.0]))
    verts = np.asarray(verts)
    bot = len(verts) - 1

    def ring(i, j):
        return 1 + (i - 1) * lon + (j % lon)

    tris = []
    for j in range(lon):
        tris.append((0, ring(1, j + 1), ring(1, j)))
    for i in range(1, lat - 1):
        for j in range(lon):
            a, b = ring(i, j), ring(i, j + 1)
            d, e = ring(i + 1, j), ring(i + 1, j + 1)
            tris.append((a, b, e))
            tris.append((a, e, d))
    for j in range(lon):
        tris.append((bot, ring(lat - 1, j), ring(lat - 1, j + 1)))
    tris = np.asarray(tris, dtype=np.int32)
    # enforce outward winding
    fixed = []
    for a, b, cc in tris:
        n = np.cross(verts[b] - verts[a], verts[cc] - verts[a])
        mid = (verts[a] + verts[b] + verts[cc]) / 3.0
        if np.dot(n, mid - c) < 0:
            fixed.append((a, cc, b))
        else:
            fixed.append((a, b, cc))
    tris = np.asarray(fixed, dtype=np.int32)
    mat = kwargs.pop("material", single_material())
    return TriMesh(
        vertices=verts,
        triangles=tris,
        face_material=np.zeros(len(tris), dtype=np.int32),
        materials=(mat,),
        **kwargs,
    )


def front_camera(width=200, height=200, distance=10.0, vfov=60.0):
    """Camera on +z axis looking at the origin."""
    return make_camera(
        Vec3(0.0, 0.0, distance), Vec3(0.0, 0.0, 0.0), Vec3(0.0, 1.0, 0.0), vfov, width, height
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
