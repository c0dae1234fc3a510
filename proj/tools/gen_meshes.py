#!/usr/bin/env python3
"""Generate the bundled benchmark meshes under data/meshes/.

cube_bevel.obj -- 0.2 m cube with 0.02 m chamfered edges: the convex hull
    of the 24 points obtained by pulling each cube corner inward along each
    axis.  The flat top is wide enough to carry the whole probe footprint.
torso.obj -- subdivision-4 icosphere scaled to a 0.18 x 0.12 x 0.08 m
    half-axis ellipsoid (a desk-scale stand-in for a curved body segment).

Both meshes are closed and consistently outward-oriented; the script checks
edge-manifoldness (every undirected edge shared by exactly two triangles)
and prints a suggested probing point with its surface tilt.
"""

import collections
import pathlib

import numpy as np
from scipy.spatial import ConvexHull

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "data" / "meshes"


def check_closed(faces):
    edges = collections.Counter()
    for a, b, c in faces:
        for u, v in ((a, b), (b, c), (c, a)):
            edges[(min(u, v), max(u, v))] += 1
    bad = {e: n for e, n in edges.items() if n != 2}
    assert not bad, f"non-manifold edges: {list(bad.items())[:5]}"


def orient_outward(verts, faces):
    """Flip triangles whose normal points toward the centroid (convex only)."""
    center = verts.mean(axis=0)
    out = []
    for a, b, c in faces:
        n = np.cross(verts[b] - verts[a], verts[c] - verts[a])
        if np.dot(n, verts[[a, b, c]].mean(axis=0) - center) < 0:
            a, b, c = a, c, b
        out.append((a, b, c))
    return out


def write_obj(path, verts, faces, comment):
    with open(path, "w") as f:
        f.write(f"# {comment}\n")
        for v in verts:
            f.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        for a, b, c in faces:
            f.write(f"f {a + 1} {b + 1} {c + 1}\n")
    print(f"{path}: {len(verts)} vertices, {len(faces)} triangles")


def cube_bevel(half=0.1, bevel=0.02):
    pts = []
    for sx in (-1, 1):
        for sy in (-1, 1):
            for sz in (-1, 1):
                corner = np.array([sx * half, sy * half, sz * half])
                for axis in range(3):
                    p = corner.copy()
                    p[axis] -= np.sign(p[axis]) * bevel
                    pts.append(p)
    pts = np.array(pts)
    hull = ConvexHull(pts)
    # Re-index to the vertices the hull actually uses.
    used = sorted(set(hull.simplices.flatten()))
    remap = {old: new for new, old in enumerate(used)}
    verts = pts[used]
    faces = [[remap[i] for i in s] for s in hull.simplices]
    faces = orient_outward(verts, faces)
    check_closed(faces)
    return verts, faces


def icosphere(subdivisions):
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts[0])
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in verts]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    return np.array(verts), faces


def torso(axes=(0.18, 0.12, 0.08)):
    verts, faces = icosphere(4)
    verts = verts * np.array(axes)
    faces = orient_outward(verts, faces)
    check_closed(faces)
    return verts, faces


def suggest_contact(verts, faces, axes, x, y):
    """Report face vs analytic ellipsoid normal at the top hit under (x, y)."""
    best = None
    for a, b, c in faces:
        va, vb, vc = verts[a], verts[b], verts[c]
        n = np.cross(vb - va, vc - va)
        if n[2] <= 0:
            continue
        # Barycentric test of the vertical line through (x, y).
        m = np.array([[vb[0] - va[0], vc[0] - va[0]],
                      [vb[1] - va[1], vc[1] - va[1]]])
        try:
            uv = np.linalg.solve(m, np.array([x - va[0], y - va[1]]))
        except np.linalg.LinAlgError:
            continue
        if uv.min() < -1e-12 or uv.sum() > 1 + 1e-12:
            continue
        z = va[2] + uv[0] * (vb[2] - va[2]) + uv[1] * (vc[2] - va[2])
        if best is None or z > best[0]:
            best = (z, n / np.linalg.norm(n))
    assert best is not None, "no face above the probing point"
    z, n_face = best
    n_true = np.array([x / axes[0] ** 2, y / axes[1] ** 2, z / axes[2] ** 2])
    n_true /= np.linalg.norm(n_true)
    dev = np.degrees(np.arccos(np.clip(np.dot(n_face, n_true), -1, 1)))
    tilt = np.degrees(np.arccos(np.clip(n_face[2], -1, 1)))
    out_deg = np.degrees(np.arctan2(-n_face[1], n_face[2]))
    in_deg = np.degrees(np.arcsin(np.clip(n_face[0], -1, 1)))
    print(
        f"  contact ({x}, {y}): z={z:.4f}, face tilt {tilt:.2f} deg "
        f"(out {out_deg:.2f}, in {in_deg:.2f}), face-vs-analytic {dev:.2f} deg"
    )
    assert dev < 2.0, "face normal strays too far from the analytic normal"
    assert 4.0 < tilt < 10.0, "pick a point with a moderate tilt"


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)

    verts, faces = cube_bevel()
    write_obj(OUT_DIR / "cube_bevel.obj", verts, faces,
              "0.2 m cube, 0.02 m chamfer; probe the flat top near (0, 0)")

    axes = (0.18, 0.12, 0.08)
    verts, faces = torso(axes)
    write_obj(OUT_DIR / "torso.obj", verts, faces,
              "0.18 x 0.12 x 0.08 m ellipsoid (subdivision-4 icosphere)")
    suggest_contact(verts, faces, axes, 0.03, 0.02)


if __name__ == "__main__":
    main()
