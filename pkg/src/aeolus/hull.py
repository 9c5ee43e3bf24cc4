"""Triangulated hull meshes: loading, generation and rigid-body properties.

Meshes live in the body frame (x forward, y up, z port) and must be closed
with outward, consistently wound normals for the volume integrals to hold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    pass


@dataclass
class HullMesh:
    vertices: np.ndarray   # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int64
    areas: np.ndarray = field(init=False)
    normals: np.ndarray = field(init=False)
    centroids: np.ndarray = field(init=False)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        v0, v1, v2 = self.corners()
        cross = np.cross(v1 - v0, v2 - v0)
        norm = np.linalg.norm(cross, axis=1)
        self.areas = 0.5 * norm
        safe = np.where(norm > 0.0, norm, 1.0)
        self.normals = cross / safe[:, None]
        self.centroids = (v0 + v1 + v2) / 3.0

    def corners(self):
        t = self.triangles
        v = self.vertices
        return v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def is_closed(self) -> bool:
        """Every directed edge must be matched by its reverse exactly once."""
        edges = {}
        for a, b, c in self.triangles:
            for e in ((a, b), (b, c), (c, a)):
                edges[e] = edges.get(e, 0) + 1
        for (a, b), count in edges.items():
            if count != 1 or edges.get((b, a), 0) != 1:
                return False
        return True

    def signed_volume(self) -> float:
        v0, v1, v2 = self.corners()
        return float(np.sum(np.einsum("ij,ij->i", v0, np.cross(v1, v2))) / 6.0)

    def scaled(self, factor: float) -> "HullMesh":
        return HullMesh(self.vertices * factor, self.triangles.copy())

    def translated(self, offset) -> "HullMesh":
        return HullMesh(self.vertices + np.asarray(offset, dtype=float), self.triangles.copy())


def mass_properties(mesh: HullMesh, density: float | None = None, target_mass: float | None = None):
    """Volume-integral mass, centre of mass and inertia tensor about it.

    Uses the standard per-triangle polynomial decomposition of the divergence
    theorem.  Exactly one of ``density`` or ``target_mass`` must be given;
    open meshes are rejected.
    """
    if (density is None) == (target_mass is None):
        raise ValueError("give exactly one of density or target_mass")
    if not mesh.is_closed():
        raise MeshError("mass properties need a closed mesh")

    v0, v1, v2 = mesh.corners()
    x0, y0, z0 = v0.T
    x1, y1, z1 = v1.T
    x2, y2, z2 = v2.T
    d = np.cross(v1 - v0, v2 - v0)  # normal scaled by twice the area

    def subexpr(w0, w1, w2):
        t0 = w0 + w1
        f1 = t0 + w2
        t1 = w0 * w0
        t2 = t1 + w1 * t0
        f2 = t2 + w2 * f1
        f3 = w0 * t1 + w1 * t2 + w2 * f2
        g0 = f2 + w0 * (f1 + w0)
        g1 = f2 + w1 * (f1 + w1)
        g2 = f2 + w2 * (f1 + w2)
        return f1, f2, f3, g0, g1, g2

    f1x, f2x, f3x, g0x, g1x, g2x = subexpr(x0, x1, x2)
    _, f2y, f3y, g0y, g1y, g2y = subexpr(y0, y1, y2)
    _, f2z, f3z, g0z, g1z, g2z = subexpr(z0, z1, z2)

    intg = np.array(
        [
            np.sum(d[:, 0] * f1x),
            np.sum(d[:, 0] * f2x),
            np.sum(d[:, 1] * f2y),
            np.sum(d[:, 2] * f2z),
            np.sum(d[:, 0] * f3x),
            np.sum(d[:, 1] * f3y),
            np.sum(d[:, 2] * f3z),
            np.sum(d[:, 0] * (y0 * g0x + y1 * g1x + y2 * g2x)),
            np.sum(d[:, 1] * (z0 * g0y + z1 * g1y + z2 * g2y)),
            np.sum(d[:, 2] * (x0 * g0z + x1 * g1z + x2 * g2z)),
        ]
    )
    intg *= np.array(
        [1 / 6, 1 / 24, 1 / 24, 1 / 24, 1 / 60, 1 / 60, 1 / 60, 1 / 120, 1 / 120, 1 / 120]
    )

    volume = intg[0]
    if volume <= 0.0:
        raise MeshError("mesh has non-positive volume; check winding")
    if target_mass is not None:
        density = target_mass / volume
    mass = density * volume
    com = intg[1:4] / volume

    # inertia about the origin, then shift to the centre of mass
    ixx = intg[5] + intg[6]
    iyy = intg[4] + intg[6]
    izz = intg[4] + intg[5]
    ixy = intg[7]
    iyz = intg[8]
    ixz = intg[9]
    inertia = density * np.array(
        [
            [ixx, -ixy, -ixz],
            [-ixy, iyy, -iyz],
            [-ixz, -iyz, izz],
        ]
    )
    cx, cy, cz = com
    shift = mass * np.array(
        [
            [cy * cy + cz * cz, -cx * cy, -cx * cz],
            [-cx * cy, cx * cx + cz * cz, -cy * cz],
            [-cx * cz, -cy * cz, cx * cx + cy * cy],
        ]
    )
    return float(mass), com, inertia - shift


def box_mesh(size=(1.0, 1.0, 1.0), subdivisions: int = 1, center=(0.0, 0.0, 0.0)) -> HullMesh:
    """Axis-aligned closed box, each face quad fanned from its centre.

    The centre fan (4 triangles per quad, 24 * subdivisions^2 total) keeps
    the triangulation mirror-symmetric, so derived hulls have no spurious
    lateral centre-of-mass offset.
    """
    sx, sy, sz = (float(s) / 2.0 for s in size)
    cx, cy, cz = center
    s = subdivisions
    verts: list[tuple[float, float, float]] = []
    tris: list[tuple[int, int, int]] = []
    cache: dict[tuple[float, float, float], int] = {}

    def vertex(p):
        key = (round(p[0], 12), round(p[1], 12), round(p[2], 12))
        if key not in cache:
            cache[key] = len(verts)
            verts.append(key)
        return cache[key]

    # each face: origin corner plus two edge vectors, outward normal = du x dv
    faces = [
        ((+sx, -sy, -sz), (0, 2 * sy, 0), (0, 0, 2 * sz)),  # +x: y cross z
        ((-sx, -sy, -sz), (0, 0, 2 * sz), (0, 2 * sy, 0)),  # -x: z cross y
        ((-sx, +sy, -sz), (0, 0, 2 * sz), (2 * sx, 0, 0)),  # +y: z cross x
        ((-sx, -sy, -sz), (2 * sx, 0, 0), (0, 0, 2 * sz)),  # -y: x cross z
        ((-sx, -sy, +sz), (2 * sx, 0, 0), (0, 2 * sy, 0)),  # +z: x cross y
        ((-sx, -sy, -sz), (0, 2 * sy, 0), (2 * sx, 0, 0)),  # -z: y cross x
    ]
    for origin, du, dv in faces:
        o = np.array(origin, dtype=float)
        u = np.array(du, dtype=float) / s
        v = np.array(dv, dtype=float) / s
        for i in range(s):
            for j in range(s):
                p00 = vertex(o + i * u + j * v)
                p10 = vertex(o + (i + 1) * u + j * v)
                p01 = vertex(o + i * u + (j + 1) * v)
                p11 = vertex(o + (i + 1) * u + (j + 1) * v)
                pm = vertex(o + (i + 0.5) * u + (j + 0.5) * v)
                tris.append((p00, p10, pm))
                tris.append((p10, p11, pm))
                tris.append((p11, p01, pm))
                tris.append((p01, p00, pm))

    vertices = np.array(verts, dtype=float) + np.array([cx, cy, cz])
    return HullMesh(vertices, np.array(tris, dtype=np.int64))


def icosphere(radius: float = 1.0, subdivisions: int = 3) -> HullMesh:
    """Subdivided icosahedron; 20 * 4^subdivisions triangles."""
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts = [v / np.linalg.norm(v) for v in raw]
    tris = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_tris = []
        for a, b, c in tris:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_tris += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        tris = new_tris

    vertices = np.array(verts) * radius
    return HullMesh(vertices, np.array(tris, dtype=np.int64))


def vee_hull(
    length: float = 8.0,
    beam: float = 2.6,
    height: float = 1.5,
    subdivisions: int = 4,
    vee: float = 0.55,
    bow_taper: float = 2.5,
    bow_rake: float = 0.55,
    skeg: bool = True,
) -> HullMesh:
    """Small planing-style hull: a subdivided box warped into a vee bottom
    with a tapered, raked bow, plus an aft skeg fin for directional
    stability.  Closed and mirror-symmetric about the centreline at any
    subdivision level.

    ``subdivisions=4`` gives 384 hull triangles (+24 skeg), ``subdivisions=7``
    1176 (+24).
    """
    base = box_mesh((length, height, beam), subdivisions=subdivisions)
    v = base.vertices.copy()
    xn = v[:, 0] / length + 0.5          # 0 stern .. 1 bow
    zn = v[:, 2] / (beam / 2.0)          # -1 .. 1

    taper = np.clip(1.0 - xn**bow_taper, 0.06, 1.0)
    v[:, 2] *= taper

    below = v[:, 1] < 0.0
    # linear deadrise: keel keeps full depth, chines lift by the vee fraction
    v[below, 1] *= 1.0 - vee * np.abs(zn[below])
    # raked bow: lift the underbody toward the stem
    v[below, 1] += bow_rake * height * np.clip(xn[below] - 0.55, 0.0, None) ** 2 * (
        -v[below, 1] / (height / 2.0)
    ) * 2.0
    v[below, 1] = np.minimum(v[below, 1], 0.0)
    tris = base.triangles.copy()
    if not skeg:
        return HullMesh(v, tris)

    # thin vertical fin under the aft keel; a separate closed component, so
    # the union stays watertight
    fin = box_mesh(
        (0.45 * length, 0.3 * height, 0.03 * beam),
        subdivisions=1,
        center=(-0.26 * length, -0.6 * height, 0.0),
    )
    verts = np.vstack([v, fin.vertices])
    tris = np.vstack([tris, fin.triangles + len(v)])
    return HullMesh(verts, tris)


def stern_point(mesh: HullMesh) -> np.ndarray:
    """Propulsion attachment: sternmost centreline point at keel height."""
    x_min = float(np.min(mesh.vertices[:, 0]))
    stern = mesh.vertices[mesh.vertices[:, 0] < x_min + 1e-6]
    y_keel = float(np.min(stern[:, 1]))
    return np.array([x_min, y_keel, 0.0])


def load_stl_ascii(path) -> HullMesh:
    verts: list[list[float]] = []
    tris: list[tuple[int, int, int]] = []
    cache: dict[tuple[float, float, float], int] = {}
    current: list[int] = []
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "vertex":
            p = (float(parts[1]), float(parts[2]), float(parts[3]))
            if p not in cache:
                cache[p] = len(verts)
                verts.append(list(p))
            current.append(cache[p])
        elif parts[0] == "endfacet":
            if len(current) != 3:
                raise MeshError(f"facet with {len(current)} vertices in {path}")
            tris.append(tuple(current))
            current = []
    if not tris:
        raise MeshError(f"no facets found in {path}")
    return HullMesh(np.array(verts), np.array(tris, dtype=np.int64))


def load_obj(path) -> HullMesh:
    verts: list[list[float]] = []
    tris: list[tuple[int, int, int]] = []
    for raw in Path(path).read_text().splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
            if len(idx) != 3:
                raise MeshError("only triangle faces are supported")
            tris.append(tuple(idx))
    if not tris:
        raise MeshError(f"no faces found in {path}")
    return HullMesh(np.array(verts), np.array(tris, dtype=np.int64))


def save_stl_ascii(mesh: HullMesh, path, name: str = "hull") -> None:
    lines = [f"solid {name}"]
    v0, v1, v2 = mesh.corners()
    for i in range(mesh.triangle_count):
        n = mesh.normals[i]
        lines.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
        lines.append("    outer loop")
        for p in (v0[i], v1[i], v2[i]):
            lines.append(f"      vertex {p[0]:.9g} {p[1]:.9g} {p[2]:.9g}")
        lines.append("    endloop")
        lines.append("  endfacet")
    lines.append(f"endsolid {name}")
    Path(path).write_text("\n".join(lines) + "\n")
