"""State-space realization algebra and system norms.

Systems are square (``m`` inputs, ``m`` outputs) continuous-time LTI
realizations ``H(s) = C (sI - A)^{-1} B + D``.  Static systems (``n = 0``)
are supported wherever they make sense.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .exceptions import DimensionError, SingularMatrixError, StabilityError
from .linalg import SpectrumSummary, eigenvalues, solve_care, solve_lyapunov

__all__ = [
    "StateSpace",
    "FrequencyResponseTable",
    "PROBE_FREQUENCIES",
    "regularize_d",
    "inverse_realization",
    "conjugate_system",
    "zeros",
    "spectral_factor",
    "conjugate_inverse_of_factor",
    "relative_error_weight",
    "evaluate_transfer",
    "h2_norm",
    "hinf_norm",
    "frequency_response",
    "series",
    "subtract",
]

# Default probe grid for realization checks: 20 log-spaced points plus dc.
PROBE_FREQUENCIES = np.concatenate(([0.0], np.logspace(-3.0, 3.0, 20)))

_D_RANK_RTOL = 1e-12


def _ro(M):
    M = np.array(M, dtype=float)
    M.setflags(write=False)
    return M


@dataclass(frozen=True)
class StateSpace:
    """Square LTI realization ``(A, B, C, D)`` with lazily cached metadata.

    Invariants checked at construction: ``A`` is ``n x n``, ``B`` is
    ``n x m``, ``C`` is ``m x n``, ``D`` is ``m x m`` (square systems only),
    all entries finite.  ``is_stable`` / ``is_minimum_phase`` are computed on
    first access and cached; they are never trusted from input.
    """

    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    D: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        if A.size == 0:
            A = A.reshape(0, 0)
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"A must be square, got {A.shape}")
        n = A.shape[0]
        if D.shape[0] != D.shape[1]:
            raise DimensionError(f"D must be square (m x m systems only), got {D.shape}")
        m = D.shape[0]
        B = B.reshape(n, -1) if B.size else B.reshape(n, m)
        C = C.reshape(-1, n) if C.size else C.reshape(m, n)
        if B.shape != (n, m):
            raise DimensionError(f"B must be {n}x{m}, got {B.shape}")
        if C.shape != (m, n):
            raise DimensionError(f"C must be {m}x{n}, got {C.shape}")
        for M, name in ((A, "A"), (B, "B"), (C, "C"), (D, "D")):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "A", _ro(A))
        object.__setattr__(self, "B", _ro(B))
        object.__setattr__(self, "C", _ro(C))
        object.__setattr__(self, "D", _ro(D))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.D.shape[0]

    @cached_property
    def poles(self):
        return eigenvalues(self.A) if self.n else SpectrumSummary.from_eigenvalues([])

    @cached_property
    def is_stable(self):
        return self.poles.is_hurwitz

    @cached_property
    def is_minimum_phase(self):
        return zeros(self).is_hurwitz

    def __repr__(self):
        return f"StateSpace(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class FrequencyResponseTable:
    """Per-frequency singular values of a transfer matrix.

    ``singular_values[k]`` holds the ``m`` singular values at
    ``frequencies[k]`` sorted descending; rows where the resolvent is
    singular are NaN and recorded in ``failures`` as ``(index, message)``.
    """

    frequencies: np.ndarray
    singular_values: np.ndarray
    failures: tuple = ()


def _solve_d(D, M, what="D"):
    try:
        return np.linalg.solve(D, M)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is singular: {exc}") from exc


def _d_rank_deficient(D):
    sv = np.linalg.svd(D, compute_uv=False)
    return sv[0] == 0.0 or sv[-1] < _D_RANK_RTOL * sv[0]


def regularize_d(sys, epsilon):
    """Replace a rank-deficient ``D`` with ``epsilon * I``.

    Rank test: smallest singular value below ``1e-12`` times the largest
    (zero ``D`` included).  Full-rank systems are returned unchanged.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not _d_rank_deficient(sys.D):
        return sys
    return StateSpace(sys.A, sys.B, sys.C, epsilon * np.eye(sys.m))


def inverse_realization(sys):
    """Realization of ``H^{-1}(s)``: ``(A - B D^{-1} C, -B D^{-1}, D^{-1} C, D^{-1})``.

    Requires invertible ``D``.  The inverse is stable iff ``sys`` is minimum
    phase; no stability check is performed here.
    """
    Dinv = _solve_d(sys.D, np.eye(sys.m))
    if sys.n == 0:
        return StateSpace(sys.A, sys.B, sys.C, Dinv)
    BDi = sys.B @ Dinv
    return StateSpace(sys.A - BDi @ sys.C, -BDi, Dinv @ sys.C, Dinv)


def conjugate_system(sys):
    """Realization of the conjugate ``H^*(s) = H(-s)^T``."""
    return StateSpace(-sys.A.T, -sys.C.T, sys.B.T, sys.D.T)


def zeros(sys):
    """Invariant zeros of a system with invertible ``D``.

    Returns the eigenvalues of ``A - B D^{-1} C`` as a
    :class:`SpectrumSummary`; the system is minimum phase iff they all have
    negative real part.
    """
    Dinv = _solve_d(sys.D, np.eye(sys.m))
    if sys.n == 0:
        return SpectrumSummary.from_eigenvalues([])
    return eigenvalues(sys.A - sys.B @ Dinv @ sys.C)


def spectral_factor(sys, branch="stabilizing"):
    """Right spectral factor ``G(s)`` of ``H(s) H^*(s)`` and the Riccati solution.

    With the default stabilizing branch the factor is minimum phase
    (``G^* G = H H^*`` with all invariant zeros of ``G`` in the open left
    half-plane); the anti-stabilizing branch yields the factor with mirrored
    (right half-plane) zeros, whose conjugate inverse then has a stable
    realization.  Construction: controllability gramian ``P11`` of
    ``(A, B)``, then ``B_x = P11 C^T + B D^T``, ``A_x = A - B_x (D D^T)^{-1} C``,
    the Riccati solution ``X`` of
    ``A_x^T X + X A_x + X B_x (D D^T)^{-1} B_x^T X + C^T (D D^T)^{-1} C = 0``,
    and the realization ``(A, B_x, D^{-1}(C - B_x^T X), D^T)``.

    Parameters
    ----------
    sys : StateSpace
        Stable system with invertible ``D``.
    branch : {"stabilizing", "antistabilizing"}

    Returns
    -------
    factor : StateSpace
    X : (n, n) ndarray
        The Riccati solution used to build the factor.

    Raises
    ------
    StabilityError
        If ``sys`` is unstable.
    RiccatiError
        Propagated from the Riccati solve.
    """
    if not sys.is_stable:
        raise StabilityError(
            f"spectral factor requires a stable system; max Re pole = {sys.poles.max_real_part:.3e}"
        )
    if sys.n == 0:
        # static system: H H^* = D D^T, a constant; factor = D^T, X empty
        return StateSpace(sys.A, sys.B, sys.C, sys.D.T), np.zeros((0, 0))
    R = sys.D @ sys.D.T
    P11 = solve_lyapunov(sys.A, sys.B @ sys.B.T)
    Bx = P11 @ sys.C.T + sys.B @ sys.D.T
    RiC = _solve_d(R, sys.C, what="D D^T")
    RiBxT = _solve_d(R, Bx.T, what="D D^T")
    Ax = sys.A - Bx @ RiC
    S = Bx @ RiBxT
    Q = sys.C.T @ RiC
    X = solve_care(Ax, 0.5 * (S + S.T), 0.5 * (Q + Q.T), branch=branch)
    Csp = _solve_d(sys.D, sys.C - Bx.T @ X)
    return StateSpace(sys.A, Bx, Csp, sys.D.T), X


def conjugate_inverse_of_factor(factor):
    """Realization of ``G^{-*}(s)`` from a spectral factor ``G(s)``.

    Chain: ``G^*`` has realization ``(-A^T, -C^T, B^T, D^T)``; inverting it
    gives ``A_gi = A_g - B_g D_g^{-1} C_g``, ``B_gi = -B_g D_g^{-1}``,
    ``C_gi = D_g^{-1} C_g``, ``D_gi = D_g^{-1}``.  The poles of the result
    mirror the zeros of ``factor``, so the realization is stable exactly when
    ``factor`` has all its zeros in the open right half-plane (the
    anti-stabilizing branch of :func:`spectral_factor`); for a minimum-phase
    factor it is anti-stable.  The frequency-domain contract
    ``G^{-*}(jw) G^*(jw) = I`` holds either way.
    """
    return inverse_realization(conjugate_system(factor))


def relative_error_weight(sys):
    """Stable realization of ``G^{-*}(s)`` for a spectral factor of ``H H^*``.

    The returned weight ``W`` satisfies ``W^*(jw) W(jw) = [H(jw) H^*(jw)]^{-1}``
    and is stable, which makes it usable in weighted-gramian machinery even
    when ``H`` (or ``H^{-1}``) is not minimum phase.  Built from the
    anti-stabilizing spectral factor, whose conjugate inverse is stable.
    """
    factor, _ = spectral_factor(sys, branch="antistabilizing")
    weight = conjugate_inverse_of_factor(factor)
    if weight.n and not weight.is_stable:
        raise StabilityError(
            "relative-error weight realization is unstable "
            f"(max Re pole = {weight.poles.max_real_part:.3e}); "
            "the system is numerically marginal"
        )
    return weight


def evaluate_transfer(sys, s):
    """Transfer matrix ``C (sI - A)^{-1} B + D`` at a complex point ``s``."""
    if sys.n == 0:
        return sys.D.astype(complex)
    M = s * np.eye(sys.n) - sys.A
    try:
        return sys.C @ np.linalg.solve(M, sys.B.astype(complex)) + sys.D
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"resolvent singular at s = {s}: {exc}") from exc


def h2_norm(sys, method="controllability"):
    """H2 norm of a stable strictly proper system.

    ``sqrt(trace(C P C^T))`` with ``P`` the controllability gramian, or the
    dual observability form ``sqrt(trace(B^T Q B))``; the two agree to
    solver precision.

    Raises
    ------
    StabilityError
        If the system is unstable.
    ValueError
        If ``D != 0`` (the norm would be infinite).
    """
    if not sys.is_stable:
        raise StabilityError(
            f"H2 norm requires a stable system; max Re pole = {sys.poles.max_real_part:.3e}"
        )
    if np.any(sys.D != 0.0):
        raise ValueError("H2 norm requires a strictly proper system (D = 0)")
    if sys.n == 0:
        return 0.0
    if method == "controllability":
        P = solve_lyapunov(sys.A, sys.B @ sys.B.T)
        val = float(np.trace(sys.C @ P @ sys.C.T))
    elif method == "observability":
        Q = solve_lyapunov(sys.A.T, sys.C.T @ sys.C)
        val = float(np.trace(sys.B.T @ Q @ sys.B))
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(np.sqrt(max(val, 0.0)))


def _sigma_max(sys, w):
    return float(np.linalg.svd(evaluate_transfer(sys, 1j * w), compute_uv=False)[0])


def _hinf_grid(sys, points=400):
    """Lower-bound grid: log-spaced plus pole-adjacent frequencies and dc."""
    freqs = [0.0]
    mags = np.abs(sys.poles.eigenvalues) if sys.n else np.array([])
    mags = mags[mags > 0]
    lo, hi = -2.0, 4.0
    if mags.size:
        lo = min(lo, np.log10(mags.min()) - 1.0)
        hi = max(hi, np.log10(mags.max()) + 1.0)
    freqs.extend(np.logspace(lo, hi, points))
    # resonant peaks sit near |Im(pole)|
    freqs.extend(np.abs(sys.poles.eigenvalues.imag[sys.poles.eigenvalues.imag > 0]))
    return np.unique(np.asarray(freqs))


def _hinf_hamiltonian_crossings(sys, gamma):
    """Frequencies where sigma_max(H(jw)) = gamma, from the Hamiltonian test."""
    A, B, C, D = sys.A, sys.B, sys.C, sys.D
    m = sys.m
    R = gamma**2 * np.eye(m) - D.T @ D
    Rinv = np.linalg.inv(R)
    ARC = A + B @ Rinv @ D.T @ C
    M = np.block(
        [
            [ARC, B @ Rinv @ B.T],
            [-C.T @ (np.eye(m) + D @ Rinv @ D.T) @ C, -ARC.T],
        ]
    )
    eig = np.linalg.eigvals(M)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(eig))))
    on_axis = eig[np.abs(eig.real) < tol]
    return np.unique(np.abs(on_axis.imag))


def hinf_norm(sys, rel_tol=1e-4):
    """H-infinity norm ``sup_w sigma_max(H(jw))`` of a stable system.

    Boyd-Balakrishnan style bisection on the Hamiltonian imaginary-axis
    eigenvalue test, initialized from a 400-point log-grid lower bound.  The
    result is certified within ``rel_tol`` relative; the grid lower bound
    never exceeds the returned value.
    """
    if not sys.is_stable:
        raise StabilityError(
            f"Hinf norm requires a stable system; max Re pole = {sys.poles.max_real_part:.3e}"
        )
    sigma_d = float(np.linalg.svd(sys.D, compute_uv=False)[0]) if sys.m else 0.0
    if sys.n == 0:
        return sigma_d
    glow = max(sigma_d, max(_sigma_max(sys, w) for w in _hinf_grid(sys)))
    if glow == 0.0:
        return 0.0
    for _ in range(200):
        gtest = glow * (1.0 + rel_tol)
        crossings = _hinf_hamiltonian_crossings(sys, gtest)
        if crossings.size == 0:
            # sup is bracketed in [glow, gtest]: midpoint is within rel_tol/2
            return 0.5 * (glow + gtest)
        ws = np.sort(crossings)
        mids = 0.5 * (ws[:-1] + ws[1:]) if ws.size > 1 else ws
        cand = [_sigma_max(sys, w) for w in np.concatenate((ws, mids))]
        gnew = max(cand)
        if gnew <= glow * (1.0 + 1e-14):
            # level set nearly tangent: gtest is an upper bound already
            return 0.5 * (glow + gtest)
        glow = gnew
    raise RuntimeError("Hinf bisection did not converge")  # pragma: no cover


def frequency_response(sys, grid):
    """Singular values of ``H(jw)`` on a frequency grid.

    Parameters
    ----------
    sys : StateSpace
    grid : array_like
        Strictly increasing positive frequencies in rad/s.

    Returns
    -------
    FrequencyResponseTable
        Per-frequency singular values, descending; resolvent singularities
        produce NaN rows recorded in ``failures``.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("frequency grid must be non-empty")
    if np.any(grid <= 0) or np.any(np.diff(grid) <= 0):
        raise ValueError("frequency grid must be strictly increasing and positive")
    sv = np.empty((grid.size, sys.m))
    failures = []
    for k, w in enumerate(grid):
        try:
            sv[k] = np.linalg.svd(evaluate_transfer(sys, 1j * w), compute_uv=False)
        except SingularMatrixError as exc:
            sv[k] = np.nan
            failures.append((k, str(exc)))
    return FrequencyResponseTable(frequencies=grid, singular_values=sv, failures=tuple(failures))


def series(g1, g2):
    """Product realization ``G1(s) G2(s)`` (input feeds ``g2`` first)."""
    if g1.m != g2.m:
        raise DimensionError(f"port mismatch: {g1.m} vs {g2.m}")
    n1, n2 = g1.n, g2.n
    A = np.block(
        [
            [g1.A, g1.B @ g2.C],
            [np.zeros((n2, n1)), g2.A],
        ]
    )
    B = np.vstack([g1.B @ g2.D, g2.B])
    C = np.hstack([g1.C, g1.D @ g2.C])
    return StateSpace(A, B, C, g1.D @ g2.D)


def subtract(g1, g2):
    """Difference realization ``G1(s) - G2(s)`` (the additive error system)."""
    if g1.m != g2.m:
        raise DimensionError(f"port mismatch: {g1.m} vs {g2.m}")
    n1, n2 = g1.n, g2.n
    A = np.block(
        [
            [g1.A, np.zeros((n1, n2))],
            [np.zeros((n2, n1)), g2.A],
        ]
    )
    B = np.vstack([g1.B, g2.B])
    C = np.hstack([g1.C, -g2.C])
    return StateSpace(A, B, C, g1.D - g2.D)
