"""Regenerate the bundled OFF meshes in crates/core/meshes."""
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "meshes")


def write_off(name, verts, cells):
    with open(os.path.join(OUT, name), "w") as f:
        f.write("OFF\n")
        f.write(f"{len(verts)} {len(cells)} 0\n")
        for v in verts:
            v = list(v) + [0.0] * (3 - len(v))
            f.write(" ".join(repr(float(c)) for c in v) + "\n")
        for c in cells:
            f.write(f"{len(c)} " + " ".join(str(i) for i in c) + "\n")


def acute_rect(lx, ly, h):
    # rows spaced ~h*sqrt(3)/2; odd rows shifted by h/2 with end vertices on x = 0 and x = lx
    nx = round(lx / h)
    ny = max(1, round(ly / (h * math.sqrt(3) / 2)))
    hy = ly / ny
    pts, rows = [], []
    for j in range(ny + 1):
        if j % 2 == 0:
            xs = [i * lx / nx for i in range(nx + 1)]
        else:
            xs = [0.0] + [(i + 0.5) * lx / nx for i in range(nx)] + [lx]
        rows.append(list(range(len(pts), len(pts) + len(xs))))
        pts += [(x, j * hy) for x in xs]
    tris = []
    for j in range(ny):
        a, b = rows[j], rows[j + 1]
        ev, od = (a, b) if j % 2 == 0 else (b, a)
        for k in range(nx):
            tris.append((ev[k], ev[k + 1], od[k + 1]))
        for k in range(nx + 1):
            tris.append((od[k], od[k + 1], ev[k]))
    return pts, tris


def annulus(r0, r1, nr, nt):
    pts = []
    for i in range(nr + 1):
        r = r0 + (r1 - r0) * i / nr
        off = 0.5 * (i % 2)
        for j in range(nt):
            th = 2 * math.pi * (j + off) / nt
            pts.append((r * math.cos(th), r * math.sin(th)))
    tris = []
    for i in range(nr):
        for j in range(nt):
            a, b = i * nt + j, i * nt + (j + 1) % nt
            c, d = (i + 1) * nt + j, (i + 1) * nt + (j + 1) % nt
            if i % 2 == 0:
                tris += [(a, b, c), (b, d, c)]
            else:
                tris += [(a, b, d), (a, d, c)]
    return pts, tris


def icosphere(levels):
    t = (1 + math.sqrt(5)) / 2
    v = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    v = [tuple(c / math.sqrt(sum(x * x for x in p)) for c in p) for p in v]
    for _ in range(levels):
        mid = {}

        def m(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                p = [(x + y) / 2 for x, y in zip(v[a], v[b])]
                r = math.sqrt(sum(x * x for x in p))
                v.append(tuple(x / r for x in p))
                mid[key] = len(v) - 1
            return mid[key]

        nf = []
        for a, b, c in f:
            ab, bc, ca = m(a, b), m(b, c), m(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        f = nf
    return v, f


def cube_tets(n):
    idx = lambda i, j, k: (i * (n + 1) + j) * (n + 1) + k
    pts = [(i / n, j / n, k / n) for i in range(n + 1) for j in range(n + 1) for k in range(n + 1)]
    tets = []
    perms = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for p in perms:
                    cur = [i, j, k]
                    path = [idx(*cur)]
                    for axis in p:
                        cur[axis] += 1
                        path.append(idx(*cur))
                    tets.append(tuple(path))
    return pts, tets


def main():
    os.makedirs(OUT, exist_ok=True)
    write_off("triangle.off", [(0, 0), (1, 0), (0, 1)], [(0, 1, 2)])
    write_off("square.off", [(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    for n in (8, 16, 32):
        write_off(f"rect_{n}.off", *acute_rect(1.0, 0.5, 1.0 / n))
    write_off("annulus.off", *annulus(0.5, 1.0, 4, 24))
    for lv in (1, 2):
        write_off(f"icosphere_{lv}.off", *icosphere(lv))
    write_off("tetrahedron.off", [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], [(0, 1, 2, 3)])
    write_off("cube_tets.off", *cube_tets(2))
    mob = [(math.cos(2 * math.pi * i / 5), math.sin(2 * math.pi * i / 5), 0.3 * (-1) ** i) for i in range(5)]
    write_off("mobius.off", mob, [(i, (i + 1) % 5, (i + 2) % 5) for i in range(5)])
    write_off("segment.off", [(0,), (0.5,), (1,)], [(0, 1), (1, 2)])


if __name__ == "__main__":
    main()
