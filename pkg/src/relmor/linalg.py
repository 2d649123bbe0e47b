"""Dense matrix-equation kernels: Sylvester, Lyapunov, and Riccati solvers.

All solvers certify their result by recomputing the residual and refuse to
return a solution that violates the documented bound.  The Bartels-Stewart
path (real Schur form, via SciPy) is the workhorse; a Kronecker
vectorization path is kept as an independently checkable oracle and as a
fallback for problems with ``p * q <= 4000`` unknowns.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .exceptions import (
    DimensionError,
    ResidualError,
    RiccatiError,
    SpectrumSeparationError,
    StabilityError,
)

__all__ = [
    "SpectrumSummary",
    "eigenvalues",
    "solve_sylvester",
    "solve_lyapunov",
    "solve_care",
    "KRON_MAX_UNKNOWNS",
]

# Largest p*q for which the Kronecker vectorization path is allowed.
KRON_MAX_UNKNOWNS = 4000

_SEP_RTOL = 1e-12
_HURWITZ_TOL = 0.0


@dataclass(frozen=True)
class SpectrumSummary:
    """Eigenvalue summary of a real square matrix.

    ``is_hurwitz`` holds exactly when ``max_real_part < 0``; for an empty
    spectrum (0 x 0 matrix) ``max_real_part`` is ``-inf`` and the matrix
    counts as Hurwitz.
    """

    eigenvalues: np.ndarray = field(repr=False)
    max_real_part: float
    is_hurwitz: bool

    @classmethod
    def from_eigenvalues(cls, eig):
        eig = np.asarray(eig, dtype=complex)
        max_re = float(np.max(eig.real)) if eig.size else float("-inf")
        return cls(eigenvalues=eig, max_real_part=max_re, is_hurwitz=max_re < _HURWITZ_TOL)


def _as_matrix(M, name, square=False):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be a 2-d matrix, got ndim={M.ndim}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got {M.shape}")
    return M


def _check_symmetric(M, name, rtol=1e-8):
    scale = max(np.linalg.norm(M, "fro"), 1.0)
    skew = np.linalg.norm(M - M.T, "fro")
    if skew > rtol * scale:
        raise ValueError(f"{name} must be symmetric; ||{name} - {name}^T|| = {skew:.3e}")
    return 0.5 * (M + M.T)


def eigenvalues(M):
    """Eigenvalues of a square matrix as a :class:`SpectrumSummary`.

    Parameters
    ----------
    M : (n, n) array_like
        Real square matrix, finite entries.

    Returns
    -------
    SpectrumSummary
        All ``n`` eigenvalues (conjugate-closed for real input), the largest
        real part, and the Hurwitz flag.

    Raises
    ------
    DimensionError
        If ``M`` is not square.
    np.linalg.LinAlgError
        If the QR iteration fails to converge; the message names the matrix
        size so callers can report partial diagnostics.
    """
    M = _as_matrix(M, "M", square=True)
    try:
        eig = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise np.linalg.LinAlgError(
            f"eigenvalue iteration did not converge for {M.shape[0]}x{M.shape[0]} matrix: {exc}"
        ) from exc
    return SpectrumSummary.from_eigenvalues(eig)


def _sylvester_separation(A, B):
    """Smallest |lambda_i(A) + lambda_j(B)| over all eigenvalue pairs."""
    ea = np.linalg.eigvals(A)
    eb = np.linalg.eigvals(B)
    return float(np.min(np.abs(ea[:, None] + eb[None, :])))


def _sylvester_residual(A, B, C, X):
    return np.linalg.norm(A @ X + X @ B + C, "fro")


def _sylvester_bound(A, B, C, X, tol_rel):
    na = np.linalg.norm(A, "fro")
    nb = np.linalg.norm(B, "fro")
    nx = np.linalg.norm(X, "fro")
    nc = np.linalg.norm(C, "fro")
    return tol_rel * (na * nx + nx * nb + nc)


def _solve_sylvester_kron(A, B, C):
    """Kronecker-vectorization solve of ``A X + X B + C = 0``.

    Uses the column-major identity ``vec(A X + X B) = (I (x) A + B^T (x) I) vec(X)``.
    Independent of the Schur path; quadratic memory, cubic-in-pq time.
    """
    p, q = C.shape
    if p * q > KRON_MAX_UNKNOWNS:
        raise DimensionError(
            f"Kronecker path refused: p*q = {p * q} exceeds {KRON_MAX_UNKNOWNS}"
        )
    K = np.kron(np.eye(q), A) + np.kron(B.T, np.eye(p))
    x = np.linalg.solve(K, -C.reshape(-1, order="F"))
    return x.reshape((p, q), order="F")


def solve_sylvester(A, B, C, tol_rel=1e-10, method="auto"):
    """Solve the Sylvester equation ``A X + X B + C = 0``.

    Parameters
    ----------
    A : (p, p) array_like
    B : (q, q) array_like
    C : (p, q) array_like
    tol_rel : float
        Relative residual tolerance; the returned ``X`` satisfies
        ``||A X + X B + C||_F <= tol_rel * (||A||_F ||X||_F + ||X||_F ||B||_F + ||C||_F)``.
    method : {"auto", "schur", "kron"}
        "schur" is Bartels-Stewart via real Schur form; "kron" is the dense
        vectorization oracle (``p * q <= 4000``); "auto" runs Schur and falls
        back to Kronecker if the certified bound is violated.

    Returns
    -------
    X : (p, q) ndarray

    Raises
    ------
    SpectrumSeparationError
        If ``min |lambda_i(A) + lambda_j(B)| < 1e-12 * (||A|| + ||B||)``,
        i.e. the operator is singular or nearly so (non-unique/ill-posed).
    ResidualError
        If no path meets the residual bound.
    """
    A = _as_matrix(A, "A", square=True)
    B = _as_matrix(B, "B", square=True)
    C = _as_matrix(C, "C")
    p, q = A.shape[0], B.shape[0]
    if C.shape != (p, q):
        raise DimensionError(f"C must be {p}x{q}, got {C.shape}")
    if method not in ("auto", "schur", "kron"):
        raise ValueError(f"unknown method {method!r}")

    sep = _sylvester_separation(A, B)
    sep_floor = _SEP_RTOL * (np.linalg.norm(A, "fro") + np.linalg.norm(B, "fro"))
    if sep < sep_floor:
        raise SpectrumSeparationError(
            "Sylvester operator is singular or ill-posed: spectra of A and -B "
            f"overlap (min separation {sep:.3e} < {sep_floor:.3e}); "
            "the solution is non-unique or does not exist",
            separation=sep,
        )

    if method == "kron":
        X = _solve_sylvester_kron(A, B, C)
    else:
        X = spla.solve_sylvester(A, B, -C)
        # one iterative-refinement sweep tightens marginal residuals
        if _sylvester_residual(A, B, C, X) > _sylvester_bound(A, B, C, X, tol_rel):
            R = A @ X + X @ B + C
            X = X + spla.solve_sylvester(A, B, -R)
        if method == "auto" and p * q <= KRON_MAX_UNKNOWNS:
            if _sylvester_residual(A, B, C, X) > _sylvester_bound(A, B, C, X, tol_rel):
                X = _solve_sylvester_kron(A, B, C)

    res = _sylvester_residual(A, B, C, X)
    bound = _sylvester_bound(A, B, C, X, tol_rel)
    if res > bound:
        raise ResidualError(
            f"Sylvester residual {res:.3e} exceeds certified bound {bound:.3e}",
            residual=res,
            bound=bound,
        )
    return X


def solve_lyapunov(A, Q, tol_rel=1e-10, method="auto"):
    """Solve the continuous Lyapunov equation ``A P + P A^T + Q = 0``.

    Parameters
    ----------
    A : (n, n) array_like
        Hurwitz matrix.
    Q : (n, n) array_like
        Symmetric right-hand side.
    tol_rel : float
        Residual tolerance, as in :func:`solve_sylvester` with ``B = A^T``.
    method : {"auto", "schur", "kron"}

    Returns
    -------
    P : (n, n) ndarray
        Symmetrized solution (``P == P.T`` exactly on return).  When
        ``Q >= 0`` the solution is positive semidefinite up to roundoff.

    Raises
    ------
    StabilityError
        If ``A`` is not Hurwitz; the message names the offending eigenvalue.
    """
    A = _as_matrix(A, "A", square=True)
    Q = _as_matrix(Q, "Q", square=True)
    if Q.shape != A.shape:
        raise DimensionError(f"Q must match A, got {Q.shape} vs {A.shape}")
    Q = _check_symmetric(Q, "Q")

    spec = eigenvalues(A)
    if not spec.is_hurwitz:
        bad = spec.eigenvalues[np.argmax(spec.eigenvalues.real)]
        raise StabilityError(
            f"A is not Hurwitz: eigenvalue {bad:.6g} has real part "
            f"{spec.max_real_part:.6g} >= 0"
        )

    if method == "kron":
        P = _solve_sylvester_kron(A, A.T, Q)
    else:
        P = spla.solve_continuous_lyapunov(A, -Q)
        if _sylvester_residual(A, A.T, Q, P) > _sylvester_bound(A, A.T, Q, P, tol_rel):
            R = A @ P + P @ A.T + Q
            P = P + spla.solve_continuous_lyapunov(A, -R)
        if method == "auto" and A.size <= KRON_MAX_UNKNOWNS:
            if _sylvester_residual(A, A.T, Q, P) > _sylvester_bound(A, A.T, Q, P, tol_rel):
                P = _solve_sylvester_kron(A, A.T, Q)

    res = _sylvester_residual(A, A.T, Q, P)
    bound = _sylvester_bound(A, A.T, Q, P, tol_rel)
    if res > bound:
        raise ResidualError(
            f"Lyapunov residual {res:.3e} exceeds certified bound {bound:.3e}",
            residual=res,
            bound=bound,
        )
    return 0.5 * (P + P.T)


def _care_residual(A, S, Q, X):
    return np.linalg.norm(A.T @ X + X @ A + X @ S @ X + Q, "fro")


def solve_care(A, S, Q, tol_rel=1e-8, branch="stabilizing", refine=True):
    """Solve the algebraic Riccati equation ``A^T X + X A + X S X + Q = 0``.

    The solution branch is selected from the invariant subspaces of the
    ``2n x 2n`` Hamiltonian ``[[A, S], [-Q, -A^T]]``: the stabilizing branch
    makes ``A + S X`` Hurwitz (this is the branch whose downstream spectral
    factor is minimum phase), the anti-stabilizing branch makes ``A + S X``
    anti-Hurwitz (the branch whose conjugate-inverse factor realization is
    stable).  One Newton-Kleinman sweep polishes the subspace solution.

    Parameters
    ----------
    A : (n, n) array_like
    S, Q : (n, n) array_like
        Symmetric positive semidefinite.
    tol_rel : float
        Residual tolerance: ``||A^T X + X A + X S X + Q||_F <= tol_rel * max(1, ||X||_F^2)``.
    branch : {"stabilizing", "antistabilizing"}
    refine : bool
        Apply one Newton-Kleinman refinement sweep.

    Returns
    -------
    X : (n, n) ndarray, symmetric.

    Raises
    ------
    ValueError
        If ``S`` or ``Q`` is indefinite beyond roundoff (precondition error).
    RiccatiError
        If the Hamiltonian has eigenvalues on the imaginary axis (no
        stabilizing solution), or the selected branch check fails.
    ResidualError
        If the residual bound cannot be met.
    """
    A = _as_matrix(A, "A", square=True)
    S = _as_matrix(S, "S", square=True)
    Q = _as_matrix(Q, "Q", square=True)
    n = A.shape[0]
    if S.shape != A.shape or Q.shape != A.shape:
        raise DimensionError("A, S, Q must share the same square shape")
    S = _check_symmetric(S, "S")
    Q = _check_symmetric(Q, "Q")
    for M, name in ((S, "S"), (Q, "Q")):
        lam_min = float(np.min(np.linalg.eigvalsh(M)))
        if lam_min < -1e-8 * max(1.0, np.linalg.norm(M, "fro")):
            raise ValueError(f"{name} must be positive semidefinite; min eigenvalue {lam_min:.3e}")
    if branch not in ("stabilizing", "antistabilizing"):
        raise ValueError(f"unknown branch {branch!r}")

    H = np.block([[A, S], [-Q, -A.T]])
    ham_eig = np.linalg.eigvals(H)
    axis_tol = 1e-9 * max(1.0, np.linalg.norm(H, "fro"))
    if np.min(np.abs(ham_eig.real)) < axis_tol:
        raise RiccatiError(
            "no stabilizing solution: Hamiltonian has eigenvalues on the "
            f"imaginary axis (min |Re| = {np.min(np.abs(ham_eig.real)):.3e})"
        )

    sort = "lhp" if branch == "stabilizing" else "rhp"
    T, Z, sdim = spla.schur(H, output="real", sort=sort)
    if sdim != n:
        raise RiccatiError(
            f"invariant subspace has dimension {sdim}, expected {n}; "
            "no well-defined solution branch"
        )
    U1 = Z[:n, :n]
    U2 = Z[n:, :n]
    try:
        X = np.linalg.solve(U1.T, U2.T).T
    except np.linalg.LinAlgError as exc:
        raise RiccatiError(f"singular subspace basis, no {branch} solution: {exc}") from exc
    X = 0.5 * (X + X.T)

    if refine:
        # Newton-Kleinman: F(X+E) ~ F(X) + (A+SX)^T E + E (A+SX)
        R0 = A.T @ X + X @ A + X @ S @ X + Q
        Acl = A + S @ X
        try:
            E = spla.solve_sylvester(Acl.T, Acl, -R0)
            Xr = 0.5 * ((X + E) + (X + E).T)
            if _care_residual(A, S, Q, Xr) < _care_residual(A, S, Q, X):
                X = Xr
        except (np.linalg.LinAlgError, ValueError):
            pass  # keep the subspace solution; residual check below decides

    closed = eigenvalues(A + S @ X)
    if branch == "stabilizing" and not closed.is_hurwitz:
        raise RiccatiError(
            f"stabilizing branch check failed: max Re eig(A + S X) = {closed.max_real_part:.3e}"
        )
    if branch == "antistabilizing":
        min_re = float(np.min(closed.eigenvalues.real))
        if min_re <= 0:
            raise RiccatiError(
                f"anti-stabilizing branch check failed: min Re eig(A + S X) = {min_re:.3e}"
            )

    res = _care_residual(A, S, Q, X)
    bound = tol_rel * max(1.0, np.linalg.norm(X, "fro") ** 2)
    if res > bound:
        raise ResidualError(
            f"Riccati residual {res:.3e} exceeds certified bound {bound:.3e}",
            residual=res,
            bound=bound,
        )
    return X
