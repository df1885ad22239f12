"""Eigenvalue inclusion regions: disks, quasi/modified Cassini ovals, double
ovals, the method constructors, and rasterized component analysis.

Membership predicates are exact (no tolerance); every region type also
exposes a vectorized signed margin (right side minus left side of its
defining inequality, positive inside) used for inclusion audits, contour
extraction and rasterization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .errors import CriticalModePresent, InputError, ResolutionTooCoarse
from .matdense import spectral_norm
from .modal import ModalForm, ModalSplit, ModeFoci, mode_singular_values


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle in the complex plane (x = Re, y = Im)."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def merge(self, other: "Box") -> "Box":
        return Box(
            min(self.xmin, other.xmin),
            max(self.xmax, other.xmax),
            min(self.ymin, other.ymin),
            max(self.ymax, other.ymax),
        )

    def padded(self, frac: float) -> "Box":
        dx = max(self.xmax - self.xmin, 1e-12) * frac
        dy = max(self.ymax - self.ymin, 1e-12) * frac
        return Box(self.xmin - dx, self.xmax + dx, self.ymin - dy, self.ymax + dy)

    def contains_point(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax


@dataclass(frozen=True)
class Disk:
    """{lam : |lam - center| <= radius}."""

    center: complex
    radius: float

    def margin(self, lam: complex) -> float:
        return self.radius - abs(lam - self.center)

    def margin_many(self, z: np.ndarray) -> np.ndarray:
        return self.radius - np.abs(z - self.center)

    def contains(self, lam: complex) -> bool:
        return self.margin(lam) >= 0.0

    def bounding_box(self) -> Box:
        c, r = self.center, self.radius
        return Box(c.real - r, c.real + r, c.imag - r, c.imag + r)

    @property
    def is_degenerate(self) -> bool:
        return self.radius == 0.0

    @property
    def foci(self) -> tuple[complex, ...]:
        return (self.center,)


@dataclass(frozen=True)
class QuasiOval:
    """{lam : |lam - f+| |lam - f-| <= |lam| r + q}.

    q == 0 is the plain quasi Cassini oval; q > 0 the modified variant used
    for clustered frequencies.  Both foci are always members.
    """

    focus_plus: complex
    focus_minus: complex
    r: float
    q: float = 0.0

    def margin(self, lam: complex) -> float:
        return (abs(lam) * self.r + self.q) - abs(lam - self.focus_plus) * abs(
            lam - self.focus_minus
        )

    def margin_many(self, z: np.ndarray) -> np.ndarray:
        return (np.abs(z) * self.r + self.q) - np.abs(z - self.focus_plus) * np.abs(
            z - self.focus_minus
        )

    def contains(self, lam: complex) -> bool:
        return self.margin(lam) >= 0.0

    def modulus_bound(self) -> float:
        """Safe bound on |lam| over the member set."""
        f = abs(self.focus_plus) + abs(self.focus_minus) + self.r
        disc = f * f - 4.0 * max(0.0, abs(self.focus_plus) * abs(self.focus_minus) - self.q)
        return 0.5 * (f + np.sqrt(max(disc, 0.0)))

    def bounding_box(self) -> Box:
        R = self.modulus_bound()
        return Box(-R, R, -R, R)

    @property
    def is_degenerate(self) -> bool:
        return self.r == 0.0 and self.q == 0.0

    @property
    def foci(self) -> tuple[complex, ...]:
        return (self.focus_plus, self.focus_minus)


@dataclass(frozen=True)
class DoubleOval:
    """{lam : prod_i |lam - foci[i]| <= bound |lam|^2} over two foci pairs."""

    foci: tuple[complex, complex, complex, complex]
    bound: float

    def margin(self, lam: complex) -> float:
        prod = 1.0
        for f in self.foci:
            prod *= abs(lam - f)
        return self.bound * abs(lam) ** 2 - prod

    def margin_many(self, z: np.ndarray) -> np.ndarray:
        prod = np.ones_like(z, dtype=float)
        for f in self.foci:
            prod *= np.abs(z - f)
        return self.bound * np.abs(z) ** 2 - prod

    def contains(self, lam: complex) -> bool:
        return self.margin(lam) >= 0.0

    def modulus_bound(self) -> float:
        m = max(abs(f) for f in self.foci)
        s = np.sqrt(max(self.bound, 0.0))
        half = 2.0 * m + s
        disc = half * half - 4.0 * m * m
        return 0.5 * (half + np.sqrt(max(disc, 0.0)))

    def bounding_box(self) -> Box:
        R = self.modulus_bound()
        return Box(-R, R, -R, R)

    @property
    def is_degenerate(self) -> bool:
        return self.bound == 0.0


RegionPrimitive = Disk | QuasiOval | DoubleOval


def contains(p: RegionPrimitive, lam: complex) -> bool:
    """Exact membership predicate."""
    return p.contains(lam)


def bounding_box(p: RegionPrimitive) -> Box:
    """Axis-aligned rectangle guaranteed to contain the member set."""
    return p.bounding_box()


class Method(str, enum.Enum):
    """Inclusion-set constructions; all but MODAL_DISK_APPROX are rigorous."""

    UNDAMPED_DISK_NORM = "UNDAMPED_DISK_NORM"
    UNDAMPED_DISK_COLSUM = "UNDAMPED_DISK_COLSUM"
    UNDAMPED_OVAL_NORM = "UNDAMPED_OVAL_NORM"
    UNDAMPED_OVAL_REL = "UNDAMPED_OVAL_REL"
    UNDAMPED_OVAL_COLSUM = "UNDAMPED_OVAL_COLSUM"
    UNDAMPED_OVAL_RELSUM = "UNDAMPED_OVAL_RELSUM"
    MODAL_DISK_NORM = "MODAL_DISK_NORM"
    MODAL_DISK_ROWSUM = "MODAL_DISK_ROWSUM"
    MODAL_OVAL_NORM = "MODAL_OVAL_NORM"
    MODAL_OVAL_ROWSUM = "MODAL_OVAL_ROWSUM"
    MODAL_DISK_APPROX = "MODAL_DISK_APPROX"
    BRAUER = "BRAUER"
    MODIFIED_OVAL = "MODIFIED_OVAL"


RIGOROUS_METHODS: frozenset[Method] = frozenset(
    m for m in Method if m is not Method.MODAL_DISK_APPROX
)


@dataclass(frozen=True)
class RegionUnion:
    """A method tag with its primitives and the generating mode indices."""

    method: Method
    primitives: tuple[RegionPrimitive, ...]
    mode_labels: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.primitives) == 0:
            raise InputError("a region union must hold at least one primitive")
        if len(self.primitives) != len(self.mode_labels):
            raise InputError("one mode label tuple per primitive required")

    @property
    def rigorous(self) -> bool:
        return self.method in RIGOROUS_METHODS

    def bounding_box(self) -> Box:
        box = self.primitives[0].bounding_box()
        for p in self.primitives[1:]:
            box = box.merge(p.bounding_box())
        return box

    def contains(self, lam: complex) -> bool:
        return any(p.contains(lam) for p in self.primitives)

    def membership_many(self, z: np.ndarray) -> np.ndarray:
        mask = np.zeros(z.shape, dtype=bool)
        for p in self.primitives:
            mask |= p.margin_many(z) >= 0.0
        return mask


def _rowsums_excluding_diagonal(Dprime: np.ndarray) -> np.ndarray:
    return np.sum(np.abs(Dprime), axis=1)


def build_regions(
    form: ModalForm,
    split: ModalSplit,
    foci: ModeFoci,
    method: Method | str,
) -> RegionUnion:
    """Construct the inclusion set of the requested method.

    Undamped methods use only the modal form (foci +-i omega_j); modal,
    Brauer and modified methods take their foci and perturbation norms from
    the split.  Methods based on per-mode condition numbers are refused when
    a critically damped mode is present.  Splits with unequal in-block
    frequencies are only rigorous for MODIFIED_OVAL, which carries the
    frequency defect in its additive extension.
    """
    method = Method(method)
    n = form.order
    D = form.D.array
    omega = form.omega

    if method in (
        Method.UNDAMPED_DISK_NORM,
        Method.UNDAMPED_DISK_COLSUM,
        Method.UNDAMPED_OVAL_NORM,
        Method.UNDAMPED_OVAL_REL,
        Method.UNDAMPED_OVAL_COLSUM,
        Method.UNDAMPED_OVAL_RELSUM,
    ):
        colsum = np.sum(np.abs(D), axis=0)
        if method is Method.UNDAMPED_DISK_NORM:
            rad = spectral_norm(D)
            prims = []
            labels = []
            for j in range(n):
                prims += [Disk(1j * omega[j], rad), Disk(-1j * omega[j], rad)]
                labels += [(j,), (j,)]
            return RegionUnion(method, tuple(prims), tuple(labels))
        if method is Method.UNDAMPED_DISK_COLSUM:
            prims = []
            labels = []
            for j in range(n):
                prims += [Disk(1j * omega[j], colsum[j]), Disk(-1j * omega[j], colsum[j])]
                labels += [(j,), (j,)]
            return RegionUnion(method, tuple(prims), tuple(labels))
        if method is Method.UNDAMPED_OVAL_NORM:
            ext = np.full(n, spectral_norm(D))
        elif method is Method.UNDAMPED_OVAL_REL:
            scaled = D / np.outer(omega, omega)
            ext = spectral_norm(scaled) * omega**2
        elif method is Method.UNDAMPED_OVAL_COLSUM:
            ext = colsum
        else:  # UNDAMPED_OVAL_RELSUM
            # The diagonal term must stay in the sum: with it this is the
            # frequency-scaled column-sum bound; without it the set misses
            # plainly damped modes already at n = 1.
            ext = np.sum(np.abs(D) / np.outer(omega, omega), axis=0) * omega**2
        prims = tuple(
            QuasiOval(1j * omega[j], -1j * omega[j], float(ext[j])) for j in range(n)
        )
        return RegionUnion(method, prims, tuple((j,) for j in range(n)))

    if len(foci) != n or split.order != n:
        raise InputError("form, split and foci orders disagree")
    lam_p = foci.lambda_plus
    lam_m = foci.lambda_minus
    dp_norm = split.dprime_norm
    rsum = _rowsums_excluding_diagonal(split.Dprime.array)

    if method in (Method.MODAL_DISK_NORM, Method.MODAL_DISK_ROWSUM, Method.MODAL_DISK_APPROX):
        if foci.any_critical:
            raise CriticalModePresent(
                f"critical mode at index {int(np.argmax(foci.critical))}"
            )
        smax, smin = mode_singular_values(split, foci)
        prims = []
        labels = []
        if method is Method.MODAL_DISK_NORM:
            kappa_s = float(np.max(smax) / np.min(smin))
            radii = [kappa_s * dp_norm] * n
        elif method is Method.MODAL_DISK_ROWSUM:
            radii = [float(smax[j] / smin[j]) * rsum[j] for j in range(n)]
        else:  # MODAL_DISK_APPROX: advisory linearization of the oval width
            gaps = np.abs(lam_p - lam_m)
            radii = None
            for j in range(n):
                prims += [
                    Disk(complex(lam_p[j]), float(dp_norm * abs(lam_p[j]) / gaps[j])),
                    Disk(complex(lam_m[j]), float(dp_norm * abs(lam_m[j]) / gaps[j])),
                ]
                labels += [(j,), (j,)]
            return RegionUnion(method, tuple(prims), tuple(labels))
        for j in range(n):
            prims += [
                Disk(complex(lam_p[j]), radii[j]),
                Disk(complex(lam_m[j]), radii[j]),
            ]
            labels += [(j,), (j,)]
        return RegionUnion(method, tuple(prims), tuple(labels))

    if method is Method.MODAL_OVAL_NORM:
        prims = tuple(
            QuasiOval(complex(lam_p[j]), complex(lam_m[j]), dp_norm) for j in range(n)
        )
        return RegionUnion(method, prims, tuple((j,) for j in range(n)))

    if method is Method.MODAL_OVAL_ROWSUM:
        prims = tuple(
            QuasiOval(complex(lam_p[j]), complex(lam_m[j]), float(rsum[j]))
            for j in range(n)
        )
        return RegionUnion(method, prims, tuple((j,) for j in range(n)))

    if method is Method.BRAUER:
        if not split.is_diagonal_mode:
            raise InputError("double ovals require the diagonal split")
        if n == 1:
            prim = DoubleOval(
                (complex(lam_p[0]), complex(lam_m[0]), complex(lam_p[0]), complex(lam_m[0])),
                0.0,
            )
            return RegionUnion(method, (prim,), ((0,),))
        prims = []
        labels = []
        for p in range(n):
            for q in range(p + 1, n):
                prims.append(
                    DoubleOval(
                        (
                            complex(lam_p[p]),
                            complex(lam_m[p]),
                            complex(lam_p[q]),
                            complex(lam_m[q]),
                        ),
                        float(rsum[p] * rsum[q]),
                    )
                )
                labels.append((p, q))
        return RegionUnion(method, tuple(prims), tuple(labels))

    if method is Method.MODIFIED_OVAL:
        znorm = float(np.max(np.abs(form.omega**2 - split.omega0**2)))
        prims = tuple(
            QuasiOval(complex(lam_p[j]), complex(lam_m[j]), dp_norm, znorm)
            for j in range(n)
        )
        return RegionUnion(method, prims, tuple((j,) for j in range(n)))

    raise InputError(f"unhandled method {method}")


# ---------------------------------------------------------------------------
# Contours


def _implicit_grid(p: RegionPrimitive, box: Box, resolution: int):
    xs = np.linspace(box.xmin, box.xmax, resolution + 1)
    ys = np.linspace(box.ymin, box.ymax, resolution + 1)
    Z = xs[None, :] + 1j * ys[:, None]
    return xs, ys, -p.margin_many(Z)


# Segment table for marching squares: case index -> list of (edge, edge)
# pairs to connect.  Corner bits: 1 = bottom-left, 2 = bottom-right,
# 4 = top-right, 8 = top-left (bit set when the corner is inside).
_SEGMENTS = {
    0: [],
    1: [("left", "bottom")],
    2: [("bottom", "right")],
    3: [("left", "right")],
    4: [("right", "top")],
    5: None,  # ambiguous
    6: [("bottom", "top")],
    7: [("left", "top")],
    8: [("top", "left")],
    9: [("top", "bottom")],
    10: None,  # ambiguous
    11: [("top", "right")],
    12: [("right", "left")],
    13: [("bottom", "right")],
    14: [("left", "bottom")],
    15: [],
}


def _edge_point(which, ix, iy, xs, ys, G):
    """Edge id and interpolated zero crossing for one cell edge."""
    if which == "bottom":
        a, b = G[iy, ix], G[iy, ix + 1]
        t = a / (a - b)
        return ("h", ix, iy), (xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy])
    if which == "top":
        a, b = G[iy + 1, ix], G[iy + 1, ix + 1]
        t = a / (a - b)
        return ("h", ix, iy + 1), (xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy + 1])
    if which == "left":
        a, b = G[iy, ix], G[iy + 1, ix]
        t = a / (a - b)
        return ("v", ix, iy), (xs[ix], ys[iy] + t * (ys[iy + 1] - ys[iy]))
    a, b = G[iy, ix + 1], G[iy + 1, ix + 1]
    t = a / (a - b)
    return ("v", ix + 1, iy), (xs[ix + 1], ys[iy] + t * (ys[iy + 1] - ys[iy]))


def boundary_polyline(p: RegionPrimitive, resolution: int = 512) -> list[np.ndarray]:
    """Closed polylines tracing the primitive boundary (marching squares).

    Degenerate (zero-measure) primitives yield an empty list.  The grid is
    the padded bounding box, so every contour closes inside it.
    """
    if resolution < 32:
        raise InputError("resolution must be at least 32")
    if p.is_degenerate:
        return []
    box = p.bounding_box().padded(0.05)
    xs, ys, G = _implicit_grid(p, box, resolution)
    # treat exact zeros as inside so boundaries through nodes still trace
    inside = G <= 0.0
    Gs = np.where(G == 0.0, -np.finfo(float).tiny, G)
    cases = (
        1 * inside[:-1, :-1]
        + 2 * inside[:-1, 1:]
        + 4 * inside[1:, 1:]
        + 8 * inside[1:, :-1]
    ).astype(np.int8)
    boundary_cells = np.argwhere((cases != 0) & (cases != 15))

    points: dict = {}
    links: dict = {}

    def connect(e1, pt1, e2, pt2):
        points.setdefault(e1, pt1)
        points.setdefault(e2, pt2)
        links.setdefault(e1, []).append(e2)
        links.setdefault(e2, []).append(e1)

    for iy, ix in boundary_cells:
        iy, ix = int(iy), int(ix)
        case = int(cases[iy, ix])
        segs = _SEGMENTS[case]
        if segs is None:  # saddle: decide by the cell-center sign
            center = 0.25 * (
                Gs[iy, ix] + Gs[iy, ix + 1] + Gs[iy + 1, ix] + Gs[iy + 1, ix + 1]
            )
            if case == 5:
                segs = (
                    [("left", "top"), ("bottom", "right")]
                    if center <= 0
                    else [("left", "bottom"), ("right", "top")]
                )
            else:  # case 10
                segs = (
                    [("bottom", "left"), ("top", "right")]
                    if center <= 0
                    else [("left", "top"), ("right", "bottom")]
                )
        for w1, w2 in segs:
            e1, pt1 = _edge_point(w1, ix, iy, xs, ys, Gs)
            e2, pt2 = _edge_point(w2, ix, iy, xs, ys, Gs)
            connect(e1, pt1, e2, pt2)

    loops = []
    unused = set(links)
    while unused:
        start = min(unused)
        loop = [start]
        unused.discard(start)
        prev = None
        cur = start
        while True:
            nxts = [e for e in links[cur] if e != prev]
            if not nxts:
                break
            nxt = nxts[0]
            if nxt == start:
                break
            if nxt not in unused:
                break
            loop.append(nxt)
            unused.discard(nxt)
            prev, cur = cur, nxt
        pts = np.array([points[e] for e in loop] + [points[loop[0]]])
        loops.append(pts)
    return loops


# ---------------------------------------------------------------------------
# Rasterized component analysis


@dataclass(frozen=True)
class Component:
    """One connected component of the rasterized union."""

    index: int
    modes: tuple[int, ...]
    primitive_indices: tuple[int, ...]
    cell_count: int

    @property
    def expected_eigenvalues(self) -> int:
        return 2 * len(self.modes)


@dataclass(frozen=True)
class ComponentAnalysis:
    components: tuple[Component, ...]
    labels: np.ndarray
    box: Box
    resolution: int

    def locate(self, lam: complex) -> int | None:
        """Component index whose cells are nearest to lam (3-cell search)."""
        ny, nx = self.labels.shape
        dx = (self.box.xmax - self.box.xmin) / nx
        dy = (self.box.ymax - self.box.ymin) / ny
        ix = int(np.floor((lam.real - self.box.xmin) / dx))
        iy = int(np.floor((lam.imag - self.box.ymin) / dy))
        for radius in range(4):
            best = None
            for jy in range(iy - radius, iy + radius + 1):
                for jx in range(ix - radius, ix + radius + 1):
                    if 0 <= jy < ny and 0 <= jx < nx and self.labels[jy, jx] > 0:
                        d2 = (jy - iy) ** 2 + (jx - ix) ** 2
                        cand = (d2, int(self.labels[jy, jx]) - 1)
                        if best is None or cand < best:
                            best = cand
            if best is not None:
                return best[1]
        return None


def component_analysis(u: RegionUnion, resolution: int = 512) -> ComponentAnalysis:
    """Flood-fill the rasterized union (4-connected) into components.

    Each component records which primitives (and hence mode indices) put
    cells into it; for per-mode oval unions the expected number of
    eigenvalues per component is twice the number of involved modes.
    Degenerate point-set primitives are rasterized as their focus cells; a
    full-measure primitive that covers no cell raises ResolutionTooCoarse.
    """
    if resolution < 32:
        raise InputError("resolution must be at least 32")
    box = u.bounding_box().padded(0.02)
    nx = ny = resolution
    dx = (box.xmax - box.xmin) / nx
    dy = (box.ymax - box.ymin) / ny
    cx = box.xmin + (np.arange(nx) + 0.5) * dx
    cy = box.ymin + (np.arange(ny) + 0.5) * dy
    Z = cx[None, :] + 1j * cy[:, None]

    masks = []
    for k, p in enumerate(u.primitives):
        if p.is_degenerate:
            m = np.zeros((ny, nx), dtype=bool)
            for f in p.foci:
                jx = min(max(int((f.real - box.xmin) / dx), 0), nx - 1)
                jy = min(max(int((f.imag - box.ymin) / dy), 0), ny - 1)
                m[jy, jx] = True
        else:
            m = p.margin_many(Z) >= 0.0
            if not m.any():
                raise ResolutionTooCoarse(
                    f"primitive {k} of {u.method.value} covers no cell at resolution {resolution}"
                )
        masks.append(m)

    union_mask = np.zeros((ny, nx), dtype=bool)
    for m in masks:
        union_mask |= m
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    raw_labels, count = scipy.ndimage.label(union_mask, structure=structure)

    # canonical order: by smallest flat cell index
    firsts = scipy.ndimage.minimum(
        np.arange(union_mask.size).reshape(ny, nx),
        raw_labels,
        index=range(1, count + 1),
    )
    order = np.argsort(np.atleast_1d(firsts))
    remap = np.zeros(count + 1, dtype=int)
    for new, old in enumerate(order):
        remap[old + 1] = new + 1
    labels = remap[raw_labels]

    comp_prims: list[list[int]] = [[] for _ in range(count)]
    for k, m in enumerate(masks):
        for lab in np.unique(labels[m]):
            if lab > 0:
                comp_prims[lab - 1].append(k)
    components = []
    for i in range(count):
        prim_idx = tuple(sorted(comp_prims[i]))
        modes = tuple(sorted({m for k in prim_idx for m in u.mode_labels[k]}))
        components.append(
            Component(
                index=i,
                modes=modes,
                primitive_indices=prim_idx,
                cell_count=int(np.sum(labels == i + 1)),
            )
        )
    labels.setflags(write=False)
    return ComponentAnalysis(tuple(components), labels, box, resolution)
