"""Modal transformation, modal-damping splits, proportional fit, mode foci.

After the congruence Phi.T M Phi = I, Phi.T K Phi = diag(omega^2) the damping
matrix becomes D = Phi.T C Phi.  The approximations built here replace D by a
commuting block-diagonal part D0 and treat Dprime = D - D0 as the
perturbation; everything downstream (regions, certificates) consumes the
split, the per-mode foci and the conditioning numbers computed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularFit
from .matdense import (
    RTOL,
    DampedSystem,
    SymMatrix,
    gen_sym_def_eig,
    solve_spd,
    spectral_norm,
    sym_eig,
)

#: Default relative gap under which consecutive frequencies are clustered.
CLUSTER_RELTOL = 1e-6

#: |theta - 1| below this flags a critically damped mode (kappa undefined).
CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class ModalForm:
    """Transform Phi, frequencies omega (ascending > 0), modal damping D."""

    Phi: np.ndarray
    omega: np.ndarray
    D: SymMatrix

    def __post_init__(self):
        Phi = np.ascontiguousarray(self.Phi, dtype=float)
        omega = np.ascontiguousarray(self.omega, dtype=float)
        n = self.D.order
        if Phi.shape != (n, n) or omega.shape != (n,):
            raise ValueError("inconsistent modal form shapes")
        if not np.all(omega > 0):
            raise ValueError("frequencies must be strictly positive")
        if np.any(np.diff(omega) < 0):
            raise ValueError("frequencies must be ascending")
        Phi.setflags(write=False)
        omega.setflags(write=False)
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "omega", omega)

    @property
    def order(self) -> int:
        return self.D.order


@dataclass(frozen=True)
class ModalSplit:
    """Block split of the modal damping after an optional block rotation.

    ``rotation`` is block-diagonal orthogonal; with Dr = rotation.T D rotation
    the stored parts satisfy D0 + Dprime == Dr exactly, D0 diagonal.
    ``omega0`` holds the per-index representative frequency (the arithmetic
    block mean), constant within each partition block.
    """

    partition: tuple[tuple[int, int], ...]
    D0: SymMatrix
    Dprime: SymMatrix
    rotation: np.ndarray
    omega0: np.ndarray
    mode: str

    def __post_init__(self):
        r = np.ascontiguousarray(self.rotation, dtype=float)
        w0 = np.ascontiguousarray(self.omega0, dtype=float)
        r.setflags(write=False)
        w0.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "omega0", w0)

    @property
    def order(self) -> int:
        return self.D0.order

    @property
    def diag(self) -> np.ndarray:
        """Rotated diagonal damping entries d_jj."""
        return np.diag(self.D0.array)

    @property
    def dprime_norm(self) -> float:
        return spectral_norm(self.Dprime)

    @property
    def dprime_frobenius(self) -> float:
        return float(np.linalg.norm(self.Dprime.array, "fro"))

    @property
    def is_diagonal_mode(self) -> bool:
        return self.mode == "diagonal"


@dataclass(frozen=True)
class ProportionalFit:
    """Least-squares alpha, beta for C ~ alpha M + beta K.

    ``residual_norm`` is the Frobenius norm of D - alpha I - beta diag(omega^2)
    (the norm the fit minimizes); it never drops below the Frobenius norm of
    the diagonal-split perturbation.  The spectral norm of the same residual
    is reported alongside; it carries no such guarantee.
    """

    alpha: float
    beta: float
    residual_norm: float
    residual_spectral_norm: float


@dataclass(frozen=True)
class ModeFoci:
    """Per-mode quadratic roots, damping ratios and conditioning.

    lambda_plus/minus are the roots of x^2 + d_jj x + omega_j^2; theta is
    d_jj / (2 omega_j); kappa is sqrt((1+theta^2)/|1-theta^2|), NaN where the
    mode is critical (|theta - 1| <= CRITICAL_TOL).
    """

    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    theta: np.ndarray
    kappa: np.ndarray
    critical: np.ndarray

    def __post_init__(self):
        for name in ("lambda_plus", "lambda_minus", "theta", "kappa", "critical"):
            a = np.ascontiguousarray(getattr(self, name))
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def any_critical(self) -> bool:
        return bool(np.any(self.critical))


def to_modal(sys: DampedSystem) -> ModalForm:
    """Modal form of a damped system: omega ascending, D = Phi.T C Phi."""
    w2, Phi = gen_sym_def_eig(sys.K, sys.M)
    D = Phi.T @ sys.C.array @ Phi
    return ModalForm(Phi, np.sqrt(w2), SymMatrix(0.5 * (D + D.T)))


def is_modally_damped(sys: DampedSystem, tol: float = RTOL) -> bool:
    """Test the commutation C K^-1 M == M K^-1 C within a relative tolerance."""
    KinvM = solve_spd(sys.K, sys.M.array, "K")
    X = sys.C.array @ KinvM
    gap = spectral_norm(X - X.T)
    kinv_norm = spectral_norm(solve_spd(sys.K, np.eye(sys.order), "K"))
    scale = spectral_norm(sys.C) * kinv_norm * spectral_norm(sys.M)
    return gap <= tol * max(scale, 1e-300)


def cluster_frequencies(omega, reltol: float = CLUSTER_RELTOL) -> tuple[tuple[int, int], ...]:
    """Contiguous blocks of nearly equal frequencies.

    Consecutive frequencies stay in one block while omega[i+1] - omega[i]
    <= reltol * omega[i].
    """
    omega = np.asarray(omega, dtype=float)
    blocks = []
    start = 0
    for i in range(1, len(omega)):
        if omega[i] - omega[i - 1] > reltol * omega[i - 1]:
            blocks.append((start, i))
            start = i
    blocks.append((start, len(omega)))
    return tuple(blocks)


def modal_split(
    form: ModalForm, mode: str = "diagonal", reltol: float = CLUSTER_RELTOL
) -> ModalSplit:
    """Split the modal damping into a diagonal part and a perturbation.

    ``diagonal`` keeps D as-is and takes its plain diagonal (singleton
    partition).  ``maximal`` clusters the frequencies, rotates each diagonal
    block of D to diagonal form by its own symmetric eigendecomposition, and
    replaces in-block frequencies by their mean; this realizes the coarsest
    commuting block-diagonal approximation, whose perturbation never exceeds
    that of any finer partition in the Frobenius norm.
    """
    n = form.order
    D = form.D.array
    if mode == "diagonal":
        partition = tuple((j, j + 1) for j in range(n))
        rotation = np.eye(n)
        omega0 = form.omega.copy()
        Dr = D
    elif mode == "maximal":
        partition = cluster_frequencies(form.omega, reltol)
        rotation = np.eye(n)
        omega0 = np.empty(n)
        for lo, hi in partition:
            omega0[lo:hi] = np.mean(form.omega[lo:hi])
            if hi - lo > 1:
                _, U = sym_eig(SymMatrix(D[lo:hi, lo:hi]))
                rotation[lo:hi, lo:hi] = U
        Dr = rotation.T @ D @ rotation
        Dr = 0.5 * (Dr + Dr.T)
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    D0 = np.diag(np.diag(Dr))
    return ModalSplit(
        partition=partition,
        D0=SymMatrix(D0),
        Dprime=SymMatrix(Dr - D0),
        rotation=rotation,
        omega0=omega0,
        mode=mode,
    )


def proportional_fit(form: ModalForm, W: SymMatrix | None = None) -> ProportionalFit:
    """Weighted trace fit of alpha I + beta diag(omega^2) to the modal damping.

    Minimizes Tr[(D - alpha I - beta Om) W (D - alpha I - beta Om)] with
    Om = diag(omega^2) (so alpha, beta are the coefficients of
    C ~ alpha M + beta K).  Stationarity gives the 2x2 normal equations

        Tr[W]    alpha + Tr[W Om]    beta = Tr[W D]
        Tr[Om W] alpha + Tr[Om W Om] beta = Tr[Om W D]

    validated against a grid-search oracle in the tests.
    """
    n = form.order
    Wa = np.eye(n) if W is None else W.array
    if W is not None:
        np.linalg.cholesky(Wa)  # weight must be positive definite
    D = form.D.array
    Om = np.diag(form.omega**2)
    a11 = np.trace(Wa)
    a12 = np.trace(Wa @ Om)
    a22 = np.trace(Om @ Wa @ Om)
    b1 = np.trace(Wa @ D)
    b2 = np.trace(Om @ Wa @ D)
    A = np.array([[a11, a12], [a12, a22]])
    det = a11 * a22 - a12 * a12
    if det <= max(a11 * a22, 1e-300) * 1e-13:
        raise SingularFit("identity and diag(omega^2) are numerically proportional")
    alpha, beta = np.linalg.solve(A, np.array([b1, b2]))
    resid = D - alpha * np.eye(n) - beta * Om
    return ProportionalFit(
        float(alpha),
        float(beta),
        float(np.linalg.norm(resid, "fro")),
        spectral_norm(resid),
    )


def quadratic_roots(d: float, omega: float) -> tuple[complex, complex]:
    """Roots of x^2 + d x + omega^2, ordered (plus, minus) by the sign of the
    discriminant square root."""
    disc = d * d - 4.0 * omega * omega
    s = np.sqrt(complex(disc))
    lam_p = (-d + s) / 2.0
    lam_m = (-d - s) / 2.0
    return complex(lam_p), complex(lam_m)


def mode_foci(form: ModalForm, split: ModalSplit) -> ModeFoci:
    """Per-mode foci, damping ratio theta and conditioning kappa.

    Uses the rotated diagonal entries of the split and its representative
    frequencies.  A mode with theta == 1 (double real root) is flagged
    critical; its kappa is NaN and condition-number based disk bounds are
    suppressed downstream, while oval regions remain valid.
    """
    d = split.diag
    w = split.omega0
    n = len(d)
    lam_p = np.empty(n, dtype=complex)
    lam_m = np.empty(n, dtype=complex)
    for j in range(n):
        lam_p[j], lam_m[j] = quadratic_roots(float(d[j]), float(w[j]))
    theta = d / (2.0 * w)
    critical = np.abs(theta - 1.0) <= CRITICAL_TOL
    kappa = np.full(n, np.nan)
    ok = ~critical
    kappa[ok] = np.sqrt((1.0 + theta[ok] ** 2) / np.abs(1.0 - theta[ok] ** 2))
    return ModeFoci(lam_p, lam_m, theta, kappa, critical)


def eigenvector_matrix(d: float, omega: float) -> np.ndarray:
    """Unit-column eigenvector matrix of [[0, w], [-w, -d]] (complex 2x2).

    Columns span (w, lambda_plus) and (w, lambda_minus); singular exactly at
    the critical damping d == 2 w.
    """
    lam_p, lam_m = quadratic_roots(d, omega)
    S = np.array([[omega, omega], [lam_p, lam_m]], dtype=complex)
    norms = np.sqrt(np.abs(S[0]) ** 2 + np.abs(S[1]) ** 2)
    return S / norms


def mode_singular_values(split: ModalSplit, foci: ModeFoci) -> tuple[np.ndarray, np.ndarray]:
    """Largest/smallest singular values of the explicit per-mode eigenvector
    matrices (NaN at critical modes, where the matrix is singular)."""
    d = split.diag
    w = split.omega0
    smax = np.full(len(d), np.nan)
    smin = np.full(len(d), np.nan)
    for j in range(len(d)):
        if foci.critical[j]:
            continue
        s = np.linalg.svd(eigenvector_matrix(float(d[j]), float(w[j])), compute_uv=False)
        smax[j], smin[j] = s[0], s[-1]
    return smax, smin


def mode_condition_numbers(split: ModalSplit, foci: ModeFoci) -> np.ndarray:
    """Exact 2-norm condition numbers of the explicit per-mode eigenvector
    matrices (NaN at critical modes)."""
    smax, smin = mode_singular_values(split, foci)
    return smax / smin


@dataclass(frozen=True)
class SpreadBounds:
    """spread(H), the off-block-diagonal norm, and the per-k eigenvalue
    bracket lo_k <= lambda_k(Hprime) <= hi_k."""

    spread: float
    offdiag_norm: float
    bracket_lo: np.ndarray
    bracket_hi: np.ndarray
    offdiag_eigenvalues: np.ndarray


def spread_bounds(H: SymMatrix, partition) -> SpreadBounds:
    """Eigenvalue bracket for the off-block-diagonal part of a symmetric H.

    With H0 the block diagonal of H under the given contiguous partition and
    Hprime = H - H0, the non-decreasing eigenvalues satisfy

        lambda_k(H) - lambda_n(H) <= lambda_k(Hprime) <= lambda_k(H) - lambda_1(H)

    hence ||Hprime|| <= spread(H), and ||Hprime|| <= ||H|| for semidefinite H.
    """
    A = H.array
    H0 = np.zeros_like(A)
    for lo, hi in partition:
        H0[lo:hi, lo:hi] = A[lo:hi, lo:hi]
    Hp = A - H0
    w = np.linalg.eigvalsh(A)
    wp = np.linalg.eigvalsh(Hp)
    return SpreadBounds(
        spread=float(w[-1] - w[0]),
        offdiag_norm=spectral_norm(Hp),
        bracket_lo=w - w[-1],
        bracket_hi=w - w[0],
        offdiag_eigenvalues=wp,
    )
