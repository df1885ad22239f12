import numpy as np
import pytest

from ovalbounds.errors import CriticalModePresent, InputError, ResolutionTooCoarse
from ovalbounds.matdense import SymMatrix, spectral_norm
from ovalbounds.modal import ModalForm, modal_split, mode_foci, quadratic_roots, to_modal
from ovalbounds.regions import (
    RIGOROUS_METHODS,
    Disk,
    DoubleOval,
    Method,
    QuasiOval,
    RegionUnion,
    boundary_polyline,
    bounding_box,
    build_regions,
    component_analysis,
    contains,
)

from conftest import random_system


def form_from(omega, D) -> ModalForm:
    omega = np.asarray(omega, dtype=float)
    return ModalForm(np.eye(len(omega)), omega, SymMatrix(D))


def pipeline(omega, D):
    form = form_from(omega, D)
    split = modal_split(form, "diagonal")
    return form, split, mode_foci(form, split)


def sample_members(p, count, seed=0):
    """Rejection-sample points of the primitive inside its bounding box."""
    rng = np.random.default_rng(seed)
    box = p.bounding_box()
    out = []
    for _ in range(40 * count):
        z = complex(rng.uniform(box.xmin, box.xmax), rng.uniform(box.ymin, box.ymax))
        if p.contains(z):
            out.append(z)
            if len(out) == count:
                break
    return out


class TestContains:
    def test_origin_outside(self):
        assert not contains(QuasiOval(1j, -1j, 0.3), 0.0)

    def test_focus_inside(self):
        assert contains(QuasiOval(1j, -1j, 0.3), 1j)

    def test_near_focus_arithmetic(self):
        # |1.01i - i| |1.01i + i| = 0.01 * 2.01 = 0.0201 <= 0.3 * 1.01
        assert contains(QuasiOval(1j, -1j, 0.3), 1.01j)

    def test_disk(self):
        d = Disk(-1.0 + 0j, 0.5)
        assert contains(d, -1.4 + 0j)
        assert not contains(d, -0.4 + 0j)

    def test_double_oval(self):
        p = DoubleOval((1j, -1j, 2j, -2j), 0.5)
        assert contains(p, 1j)
        assert not contains(p, 10.0 + 0j)

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(1)
        prims = [
            QuasiOval(-0.3 + 1.2j, -0.3 - 1.2j, 0.4),
            QuasiOval(-1.0 + 0j, -2.5 + 0j, 0.3, 0.1),
            Disk(-1.5 + 0j, 0.7),
            DoubleOval((1j, -1j, -1.0 + 0j, -2.0 + 0j), 0.2),
        ]
        for p in prims:
            for _ in range(200):
                z = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
                assert p.contains(z) == p.contains(np.conj(z))

    def test_degenerate_is_exactly_the_foci(self):
        p = QuasiOval(1j, -1j, 0.0, 0.0)
        assert p.contains(1j) and p.contains(-1j)
        for z in (0.0, 1.0001j, -0.999j, 0.01 + 1j):
            assert not p.contains(z)

    def test_extension_monotonicity(self):
        small = QuasiOval(-0.2 + 1j, -0.2 - 1j, 0.25)
        big = QuasiOval(-0.2 + 1j, -0.2 - 1j, 0.4)
        for z in sample_members(small, 300, seed=2):
            assert big.contains(z)


class TestBoundingBox:
    def test_disk_exact(self):
        b = bounding_box(Disk(-1.0 + 0j, 0.5))
        assert (b.xmin, b.xmax, b.ymin, b.ymax) == (-1.5, -0.5, -0.5, 0.5)

    def test_oval_formula(self):
        p = QuasiOval(1j, -1j, 0.3)
        expect = 0.5 * (2.3 + np.sqrt(2.3**2 - 4.0))
        assert p.modulus_bound() == pytest.approx(expect)

    def test_members_inside_box(self):
        prims = [
            QuasiOval(1j, -1j, 0.3),
            QuasiOval(-0.5 + 0.9j, -0.5 - 0.9j, 0.8, 0.3),
            DoubleOval((1j, -1j, 2j, -2j), 1.5),
        ]
        for p in prims:
            box = p.bounding_box()
            # sample just outside the modulus bound: no members there
            for z in sample_members(p, 400, seed=3):
                assert box.contains_point(z.real, z.imag)

    def test_degenerate_contains_foci(self):
        p = QuasiOval(1j, -1j, 0.0)
        box = p.bounding_box()
        assert box.contains_point(0.0, 1.0) and box.contains_point(0.0, -1.0)


class TestBuildRegions:
    def test_diagonal_damping_degenerate_ovals(self):
        form, split, foci = pipeline([1.0, 2.0], np.diag([0.3, 0.4]))
        u = build_regions(form, split, foci, Method.MODAL_OVAL_NORM)
        assert all(isinstance(p, QuasiOval) and p.r == 0.0 for p in u.primitives)

    def test_modal_oval_extension_from_coupling(self):
        form, split, foci = pipeline([1.0, 2.0], np.array([[1.0, 0.2], [0.2, 2.0]]))
        u = build_regions(form, split, foci, Method.MODAL_OVAL_NORM)
        assert len(u.primitives) == 2
        for j, p in enumerate(u.primitives):
            assert p.r == pytest.approx(0.2)
            assert p.focus_plus == pytest.approx(complex(foci.lambda_plus[j]))
            assert p.focus_minus == pytest.approx(complex(foci.lambda_minus[j]))

    def test_undamped_counts_and_extensions(self):
        D = np.array([[1.0, 0.5], [0.5, 2.0]])
        form, split, foci = pipeline([1.0, 2.0], D)
        norm = spectral_norm(D)
        u = build_regions(form, split, foci, Method.UNDAMPED_DISK_NORM)
        assert len(u.primitives) == 4
        assert all(p.radius == pytest.approx(norm) for p in u.primitives)
        assert {p.center for p in u.primitives} == {1j, -1j, 2j, -2j}

        u = build_regions(form, split, foci, Method.UNDAMPED_DISK_COLSUM)
        assert [p.radius for p in u.primitives[:2]] == [pytest.approx(1.5)] * 2
        assert [p.radius for p in u.primitives[2:]] == [pytest.approx(2.5)] * 2

        u = build_regions(form, split, foci, Method.UNDAMPED_OVAL_NORM)
        assert len(u.primitives) == 2
        assert all(p.r == pytest.approx(norm) for p in u.primitives)

        u = build_regions(form, split, foci, Method.UNDAMPED_OVAL_COLSUM)
        assert [p.r for p in u.primitives] == [pytest.approx(1.5), pytest.approx(2.5)]

        u = build_regions(form, split, foci, Method.UNDAMPED_OVAL_REL)
        scaled = D / np.outer([1.0, 2.0], [1.0, 2.0])
        s = spectral_norm(scaled)
        assert [p.r for p in u.primitives] == [pytest.approx(s), pytest.approx(4 * s)]

        u = build_regions(form, split, foci, Method.UNDAMPED_OVAL_RELSUM)
        # scaled column sums keep the diagonal term
        r0 = (1.0 / 1.0 + 0.5 / 2.0) * 1.0
        r1 = (0.5 / 2.0 + 2.0 / 4.0) * 4.0
        assert [p.r for p in u.primitives] == [pytest.approx(r0), pytest.approx(r1)]

    def test_modal_disks_use_explicit_condition_numbers(self):
        form, split, foci = pipeline([1.0, 2.0], np.array([[1.0, 0.2], [0.2, 2.0]]))
        u = build_regions(form, split, foci, Method.MODAL_DISK_NORM)
        assert len(u.primitives) == 4
        radii = {p.radius for p in u.primitives}
        assert len(radii) == 1
        (radius,) = radii
        # honest condition number exceeds the closed-form report
        assert radius >= float(np.max(foci.kappa)) * split.dprime_norm - 1e-12

        u = build_regions(form, split, foci, Method.MODAL_DISK_ROWSUM)
        from ovalbounds.modal import mode_condition_numbers

        kappas = mode_condition_numbers(split, foci)
        rsums = np.sum(np.abs(split.Dprime.array), axis=1)
        for j in range(2):
            assert u.primitives[2 * j].radius == pytest.approx(kappas[j] * rsums[j])

    def test_modal_disk_rejects_critical(self):
        form, split, foci = pipeline([1.0, 2.0], np.diag([2.0, 1.0]))
        assert foci.any_critical
        for method in (Method.MODAL_DISK_NORM, Method.MODAL_DISK_ROWSUM, Method.MODAL_DISK_APPROX):
            with pytest.raises(CriticalModePresent):
                build_regions(form, split, foci, method)

    def test_brauer_counts(self):
        form, split, foci = pipeline([1.0, 2.0, 3.0], np.eye(3) + 0.1)
        u = build_regions(form, split, foci, Method.BRAUER)
        assert len(u.primitives) == 3
        assert u.mode_labels == ((0, 1), (0, 2), (1, 2))

    def test_brauer_single_mode_degenerate(self):
        form, split, foci = pipeline([1.0], np.array([[0.5]]))
        u = build_regions(form, split, foci, Method.BRAUER)
        assert len(u.primitives) == 1
        assert u.primitives[0].bound == 0.0
        assert u.primitives[0].contains(complex(foci.lambda_plus[0]))

    def test_brauer_requires_diagonal_split(self):
        form = form_from([1.0, 1.0], np.array([[1.0, 0.3], [0.3, 1.0]]))
        msplit = modal_split(form, "maximal")
        foci = mode_foci(form, msplit)
        with pytest.raises(InputError):
            build_regions(form, msplit, foci, Method.BRAUER)

    def test_modified_oval_carries_frequency_defect(self):
        form = form_from([1.0, 1.01], np.array([[1.0, 0.3], [0.3, 1.0]]))
        split = modal_split(form, "maximal", reltol=0.05)
        foci = mode_foci(form, split)
        u = build_regions(form, split, foci, Method.MODIFIED_OVAL)
        znorm = float(np.max(np.abs(form.omega**2 - split.omega0**2)))
        assert znorm > 0.0
        assert all(p.q == pytest.approx(znorm) for p in u.primitives)

    def test_approx_method_not_rigorous(self):
        form, split, foci = pipeline([1.0, 2.0], np.array([[1.0, 0.2], [0.2, 2.0]]))
        u = build_regions(form, split, foci, Method.MODAL_DISK_APPROX)
        assert not u.rigorous
        assert Method.MODAL_DISK_APPROX not in RIGOROUS_METHODS
        assert len(RIGOROUS_METHODS) == len(Method) - 1

    def test_sign_gauge_leaves_extensions_invariant(self):
        sys_ = random_system(4, 99)
        form = to_modal(sys_)
        signs = np.diag([1.0, -1.0, 1.0, -1.0])
        flipped = ModalForm(
            form.Phi @ signs, form.omega, SymMatrix(signs @ form.D.array @ signs)
        )
        for method in (Method.UNDAMPED_OVAL_COLSUM, Method.MODAL_OVAL_ROWSUM):
            u1 = build_regions(form, modal_split(form), mode_foci(form, modal_split(form)), method)
            u2 = build_regions(
                flipped, modal_split(flipped), mode_foci(flipped, modal_split(flipped)), method
            )
            for p1, p2 in zip(u1.primitives, u2.primitives):
                assert p1.r == pytest.approx(p2.r, abs=1e-13)


# figure panels: (d, r) with omega = 1; the d = 1.7 and 2.3 panels sit exactly
# on the tangency configuration |lam^2 + d lam + 1| = r |lam| at lam = -1, so
# their rasterized counts are the frozen oracle answers for that edge.
FIGURE_PANELS = [
    (0.1, 0.3, 2, 2),
    (1.0, 0.3, 2, 2),
    (1.7, 0.3, 1, 2),
    (2.3, 0.3, 2, 1),
    (2.2, 0.1, 2, 2),
]


class TestBoundaryPolyline:
    def test_disk_radial_deviation(self):
        disk = Disk(0j, 1.0)
        loops = boundary_polyline(disk, 256)
        assert len(loops) == 1
        pts = loops[0]
        assert np.allclose(pts[0], pts[-1])
        radii = np.hypot(pts[:, 0], pts[:, 1])
        box = disk.bounding_box().padded(0.05)
        cell = (box.xmax - box.xmin) / 256
        assert np.max(np.abs(radii - 1.0)) <= 2 * cell

    def test_degenerate_empty(self):
        assert boundary_polyline(QuasiOval(1j, -1j, 0.0), 128) == []

    def test_rejects_low_resolution(self):
        with pytest.raises(InputError):
            boundary_polyline(Disk(0j, 1.0), 16)

    @pytest.mark.parametrize("d,r,_,loops", FIGURE_PANELS)
    def test_figure_loop_counts(self, d, r, _, loops):
        lp, lm = quadratic_roots(d, 1.0)
        assert len(boundary_polyline(QuasiOval(lp, lm, r), 512)) == loops

    def test_points_on_implicit_zero(self):
        p = QuasiOval(-0.5 + 0.9j, -0.5 - 0.9j, 0.35)
        box = p.bounding_box().padded(0.05)
        cell = (box.xmax - box.xmin) / 512
        # Lipschitz constant of the margin is bounded by a few units here
        for loop in boundary_polyline(p, 512):
            vals = np.array([p.margin(complex(x, y)) for x, y in loop[:-1]])
            assert np.max(np.abs(vals)) <= 10 * cell


class TestComponentAnalysis:
    def test_two_disjoint_disks(self):
        u = RegionUnion(
            Method.UNDAMPED_DISK_NORM,
            (Disk(-1.0 + 0j, 0.3), Disk(2.0 + 0j, 0.4)),
            ((0,), (1,)),
        )
        ca = component_analysis(u, 256)
        assert len(ca.components) == 2
        assert sorted(c.modes for c in ca.components) == [(0,), (1,)]
        assert all(c.expected_eigenvalues == 2 for c in ca.components)

    @pytest.mark.parametrize("d,r,count,_", FIGURE_PANELS)
    def test_figure_component_counts(self, d, r, count, _):
        lp, lm = quadratic_roots(d, 1.0)
        u = RegionUnion(Method.MODAL_OVAL_NORM, (QuasiOval(lp, lm, r),), ((0,),))
        assert len(component_analysis(u, 512).components) == count

    def test_critical_single_component(self):
        lp, lm = quadratic_roots(2.0, 1.0)
        u = RegionUnion(Method.MODAL_OVAL_NORM, (QuasiOval(lp, lm, 0.3),), ((0,),))
        assert len(component_analysis(u, 512).components) == 1

    def test_merged_component_labels(self):
        u = RegionUnion(
            Method.UNDAMPED_DISK_NORM,
            (Disk(0j, 1.0), Disk(0.5 + 0j, 1.0), Disk(5.0 + 0j, 0.5)),
            ((0,), (1,), (2,)),
        )
        ca = component_analysis(u, 256)
        assert len(ca.components) == 2
        assert ca.components[0].modes in (((0, 1)), (0, 1))
        assert ca.components[1].modes == (2,)

    def test_resolution_too_coarse(self):
        u = RegionUnion(
            Method.UNDAMPED_DISK_NORM,
            (Disk(0j, 1e-9), Disk(10.0 + 0j, 3.0)),
            ((0,), (1,)),
        )
        with pytest.raises(ResolutionTooCoarse):
            component_analysis(u, 64)

    def test_degenerate_primitives_marked_at_foci(self):
        u = RegionUnion(
            Method.MODAL_OVAL_NORM,
            (QuasiOval(1j, -1j, 0.0), QuasiOval(-1.0 + 2j, -1.0 - 2j, 0.0)),
            ((0,), (1,)),
        )
        ca = component_analysis(u, 128)
        assert len(ca.components) == 4

    def test_locate(self):
        u = RegionUnion(
            Method.UNDAMPED_DISK_NORM,
            (Disk(-1.0 + 0j, 0.3), Disk(2.0 + 0j, 0.4)),
            ((0,), (1,)),
        )
        ca = component_analysis(u, 256)
        left = ca.locate(-1.0 + 0j)
        right = ca.locate(2.1 + 0j)
        assert left is not None and right is not None and left != right
        assert ca.components[left].modes == (0,)
        assert ca.components[right].modes == (1,)

    def test_determinism(self):
        lp, lm = quadratic_roots(0.4, 1.0)
        u = RegionUnion(Method.MODAL_OVAL_NORM, (QuasiOval(lp, lm, 0.25),), ((0,),))
        a = component_analysis(u, 192)
        b = component_analysis(u, 192)
        assert np.array_equal(a.labels, b.labels)
        assert a.components == b.components


class TestBrauerRefinement:
    def test_double_ovals_inside_cassini_union(self):
        rng = np.random.default_rng(4)
        for seed in range(10):
            n = int(rng.integers(2, 6))
            sys_ = random_system(n, 300 + seed)
            form = to_modal(sys_)
            split = modal_split(form)
            foci = mode_foci(form, split)
            brauer = build_regions(form, split, foci, Method.BRAUER)
            cassini = build_regions(form, split, foci, Method.MODAL_OVAL_ROWSUM)
            box = brauer.bounding_box()
            zs = (
                rng.uniform(box.xmin, box.xmax, 4000)
                + 1j * rng.uniform(box.ymin, box.ymax, 4000)
            )
            inside_b = brauer.membership_many(zs)
            inside_c = cassini.membership_many(zs)
            assert not np.any(inside_b & ~inside_c)
