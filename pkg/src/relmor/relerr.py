"""Multiplicative error system: realization, block gramians, norms, gradients.

The multiplicative error of a reduced model ``Hr`` against ``H`` (shared,
invertible ``D``) is ``E(s) = Hr^{-1}(s) (H(s) - Hr(s))``.  Everything here
works on its explicit ``(n + 2r)``-state realization and the twelve gramian
blocks of that realization, solved block-by-block in dependency order.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionError, MinimumPhaseError, SingularMatrixError
from .linalg import solve_lyapunov, solve_sylvester
from .sstools import StateSpace, h2_norm, relative_error_weight, series, subtract

__all__ = [
    "RomCandidate",
    "ErrorSystemGramians",
    "GradientBundle",
    "build_delta_mul",
    "compute_gramians",
    "h2_norm_delta_mul",
    "gradients",
    "deviations",
    "delta_mul_norm",
    "weighted_error_h2",
]

_BIORTH_TOL = 1e-10


@dataclass(frozen=True)
class RomCandidate:
    """A reduced realization together with the reduction matrices that built it.

    ``V`` and ``W`` are ``n x r`` with ``W^T V = I`` (checked to 1e-10) for
    candidates produced by oblique projection; direct candidates carry
    ``V = W = None``.  ``info`` holds algorithm-specific diagnostics (Hankel
    values, the epsilon actually used, ...).
    """

    rom: StateSpace
    V: np.ndarray = None
    W: np.ndarray = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.V is None) != (self.W is None):
            raise ValueError("V and W must both be given or both be None")
        if self.V is not None:
            V = np.asarray(self.V, dtype=float)
            W = np.asarray(self.W, dtype=float)
            r = self.rom.n
            if V.shape != W.shape or V.shape[1] != r:
                raise DimensionError(
                    f"reduction matrices must be n x {r}, got {V.shape} and {W.shape}"
                )
            gap = np.max(np.abs(W.T @ V - np.eye(r))) if r else 0.0
            if gap > _BIORTH_TOL:
                raise ValueError(f"W^T V deviates from identity by {gap:.3e} > {_BIORTH_TOL}")
            object.__setattr__(self, "V", V)
            object.__setattr__(self, "W", W)

    @property
    def order(self):
        return self.rom.n


@dataclass(frozen=True)
class ErrorSystemGramians:
    """The twelve gramian blocks of the multiplicative error realization.

    ``P11, P12, P13h, P22h, P23h, P33h`` partition the controllability
    gramian; ``Q11h ... Q33h`` the observability gramian.  Hatted names mark
    blocks that involve the reduced or inverse-chain states.
    """

    P11: np.ndarray
    P12: np.ndarray
    P13h: np.ndarray
    P22h: np.ndarray
    P23h: np.ndarray
    P33h: np.ndarray
    Q11h: np.ndarray
    Q12h: np.ndarray
    Q13h: np.ndarray
    Q22h: np.ndarray
    Q23h: np.ndarray
    Q33h: np.ndarray


@dataclass(frozen=True)
class GradientBundle:
    """First-order data of ``J = ||E||_H2^2`` at a reduced realization.

    Gradient matrices, the Theorem-style residual terms ``Xbar, Ybar, Zbar``,
    the three stationarity left-hand sides (as matrices and their norms),
    and the deviation matrices ``d1, d2, d3`` of the oblique-projection
    reduction-matrix choice.
    """

    dJ_dAr: np.ndarray
    dJ_dBr: np.ndarray
    dJ_dCr: np.ndarray
    Xbar: np.ndarray
    Ybar: np.ndarray
    Zbar: np.ndarray
    opc_lhs: tuple
    opc_residuals: tuple
    deviations: tuple


def _shared_d(full, rom):
    if full.m != rom.m:
        raise DimensionError(f"port mismatch: {full.m} vs {rom.m}")
    if not np.array_equal(full.D, rom.D):
        raise ValueError("full and reduced models must share the same D matrix")
    D = full.D
    sv = np.linalg.svd(D, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-12 * sv[0]:
        raise SingularMatrixError("shared D matrix is singular; regularize first")
    return D


def _inverse_dynamics(rom, D):
    Dinv = np.linalg.solve(D, np.eye(D.shape[0]))
    return rom.A - rom.B @ Dinv @ rom.C, Dinv


def build_delta_mul(full, rom):
    """Realization of the multiplicative error ``Hr^{-1} (H - Hr)``.

    Block structure (states: full, reduced, inverse chain)::

        A = [ A        0          0        ]      B = [ B  ]
            [ 0        Ar         0        ]          [ Br ]
            [ -Br Di C Br Di Cr   Ar-Br Di Cr ]       [ 0  ]
        C = [ Di C   -Di Cr   Di Cr ],   D = 0,   Di = D^{-1}

    Requires the reduced model to be stable and minimum phase (else the
    realization is unstable; use the spectral-factor route instead) and a
    shared invertible ``D``.
    """
    D = _shared_d(full, rom)
    if not rom.is_stable:
        raise MinimumPhaseError("reduced model must be stable to realize the error system")
    if not rom.is_minimum_phase:
        raise MinimumPhaseError(
            "reduced model is not minimum phase; its inverse is unstable -- "
            "evaluate through the conjugate-inverse spectral factor route"
        )
    n, r, m = full.n, rom.n, full.m
    Ainv, Dinv = _inverse_dynamics(rom, D)
    A = np.zeros((n + 2 * r, n + 2 * r))
    A[:n, :n] = full.A
    A[n : n + r, n : n + r] = rom.A
    A[n + r :, :n] = -rom.B @ Dinv @ full.C
    A[n + r :, n : n + r] = rom.B @ Dinv @ rom.C
    A[n + r :, n + r :] = Ainv
    B = np.vstack([full.B, rom.B, np.zeros((r, m))])
    C = np.hstack([Dinv @ full.C, -Dinv @ rom.C, Dinv @ rom.C])
    return StateSpace(A, B, C, np.zeros((m, m)))


def compute_gramians(full, rom):
    """All twelve gramian blocks of the multiplicative error realization.

    Solved block-by-block in dependency order (controllability:
    P11 -> P12/P22 -> P13/P23 -> P33; observability: Q33 -> Q13/Q23 ->
    Q12/Q22 -> Q11), each a single Lyapunov or Sylvester solve.  The
    monolithic ``(n + 2r)`` gramians of :func:`build_delta_mul` reproduce
    these blocks exactly; that equivalence is a test oracle, not a runtime
    path.

    Raises
    ------
    MinimumPhaseError
        If ``Ar - Br D^{-1} Cr`` is not Hurwitz (reduced model not minimum
        phase), in which case the observability chain is unsolvable.
    """
    D = _shared_d(full, rom)
    A, B, C = full.A, full.B, full.C
    Ar, Br, Cr = rom.A, rom.B, rom.C
    Ainv, Dinv = _inverse_dynamics(rom, D)
    if not rom.is_stable:
        raise MinimumPhaseError("reduced model must be stable")
    if not rom.is_minimum_phase:
        raise MinimumPhaseError(
            "reduced model is not minimum phase (Ar - Br D^{-1} Cr not Hurwitz); "
            "gramian blocks are unavailable -- use the spectral-factor route"
        )

    DiT_BrT = Dinv.T @ Br.T  # recurring factor (D^{-T} Br^T)
    CtDt = C.T @ DiT_BrT
    CrtDt = Cr.T @ DiT_BrT

    P11 = solve_lyapunov(A, B @ B.T)
    P12 = solve_sylvester(A, Ar.T, B @ Br.T)
    P22 = solve_lyapunov(Ar, Br @ Br.T)
    P13 = solve_sylvester(A, Ainv.T, -P11 @ CtDt + P12 @ CrtDt)
    P23 = solve_sylvester(Ar, Ainv.T, -P12.T @ CtDt + P22 @ CrtDt)
    P33 = solve_lyapunov(
        Ainv,
        -Br @ Dinv @ C @ P13
        + Br @ Dinv @ Cr @ P23
        - P13.T @ CtDt
        + P23.T @ CrtDt,
    )

    Ctd = C.T @ Dinv.T @ Dinv  # C^T D^{-T} D^{-1}
    Crtd = Cr.T @ Dinv.T @ Dinv
    Q33 = solve_lyapunov(Ainv.T, Crtd @ Cr)
    Q13 = solve_sylvester(A.T, Ainv, -CtDt @ Q33 + Ctd @ Cr)
    Q23 = solve_sylvester(Ar.T, Ainv, CrtDt @ Q33 - Crtd @ Cr)
    Q22 = solve_lyapunov(Ar.T, CrtDt @ Q23.T + Q23 @ Br @ Dinv @ Cr + Crtd @ Cr)
    Q12 = solve_sylvester(A.T, Ar, -CtDt @ Q23.T + Q13 @ Br @ Dinv @ Cr - Ctd @ Cr)
    Q11 = solve_lyapunov(A.T, -CtDt @ Q13.T - Q13 @ Br @ Dinv @ C + Ctd @ C)

    return ErrorSystemGramians(
        P11=P11, P12=P12, P13h=P13, P22h=P22, P23h=P23, P33h=P33,
        Q11h=Q11, Q12h=Q12, Q13h=Q13, Q22h=Q22, Q23h=Q23, Q33h=Q33,
    )


def h2_norm_delta_mul(g, full, rom):
    """H2 norm of the multiplicative error from its gramian blocks.

    Computes both trace forms -- controllability
    ``trace(C_mul P C_mul^T)`` expanded over the blocks, and observability
    ``trace(B^T Q11 B + 2 B^T Q12 Br + Br^T Q22 Br)`` -- and requires them to
    agree to 1e-8 relative; returns the controllability value.

    Raises
    ------
    ValueError
        If the two forms disagree or a trace is negative beyond roundoff
        (gramians inconsistent with the pair).
    """
    D = _shared_d(full, rom)
    Dinv = np.linalg.solve(D, np.eye(D.shape[0]))
    C, Cr = full.C, rom.C
    B, Br = full.B, rom.B
    DC = Dinv @ C
    DCr = Dinv @ Cr
    ctrb = float(
        np.trace(DC @ g.P11 @ DC.T)
        - 2.0 * np.trace(DC @ g.P12 @ DCr.T)
        + 2.0 * np.trace(DC @ g.P13h @ DCr.T)
        + np.trace(DCr @ g.P22h @ DCr.T)
        - 2.0 * np.trace(DCr @ g.P23h @ DCr.T)
        + np.trace(DCr @ g.P33h @ DCr.T)
    )
    obsv = float(
        np.trace(B.T @ g.Q11h @ B)
        + 2.0 * np.trace(B.T @ g.Q12h @ Br)
        + np.trace(Br.T @ g.Q22h @ Br)
    )
    scale = max(abs(ctrb), abs(obsv), 1e-300)
    if abs(ctrb - obsv) > 1e-8 * scale:
        raise ValueError(
            f"gramian trace forms disagree: controllability {ctrb:.12e} vs "
            f"observability {obsv:.12e}"
        )
    if ctrb < -1e-10 * scale:
        raise ValueError(f"negative squared norm {ctrb:.3e} from inconsistent gramians")
    return float(np.sqrt(max(ctrb, 0.0)))


def weighted_error_h2(weight, full, rom):
    """H2 norm of ``weight * (full - rom)`` for a stable weight realization."""
    err = series(weight, subtract(full, rom))
    err = StateSpace(err.A, err.B, err.C, np.zeros((err.m, err.m)))
    return h2_norm(err)


def delta_mul_norm(full, rom, route="auto"):
    """H2 norm of the multiplicative error, for any stable reduced model.

    ``route="gramian"`` uses the block-gramian trace forms (reduced model
    must be minimum phase); ``route="factor"`` evaluates
    ``|| G_r^{-*} (H - Hr) ||_H2`` through the stable conjugate-inverse
    spectral factor of the reduced model, which is valid whether or not the
    reduced model is minimum phase and coincides with the gramian value when
    it is.  ``"auto"`` picks the gramian route when available.
    """
    D = _shared_d(full, rom)
    if route == "auto":
        route = "gramian" if (rom.is_stable and rom.is_minimum_phase) else "factor"
    if route == "gramian":
        return h2_norm_delta_mul(compute_gramians(full, rom), full, rom)
    if route == "factor":
        return weighted_error_h2(relative_error_weight(rom), full, rom)
    raise ValueError(f"unknown route {route!r}")


def _theorem_terms(g, full, rom, Dinv):
    """Xbar, Ybar, Zbar of the stationarity conditions."""
    B, C = full.B, full.C
    Br, Cr = rom.B, rom.C
    Xbar = (
        g.Q13h.T @ g.P13h
        + g.Q23h @ g.P23h.T
        + g.Q23h @ g.P23h
        + g.Q33h @ g.P33h
    )
    Ybar = (
        -g.Q13h.T @ g.P11 @ C.T
        + g.Q13h.T @ g.P12 @ Cr.T
        - g.Q23h @ g.P12.T @ C.T
        + g.Q23h @ g.P22h @ Cr.T
        - g.Q13h.T @ g.P13h @ Cr.T
        - g.Q33h @ g.P13h.T @ C.T
        - g.Q23h @ g.P23h @ Cr.T
        + g.Q33h @ g.P23h.T @ Cr.T
        - g.Q33h @ g.P33h @ Cr.T
    ) @ Dinv.T
    Zbar = Dinv.T @ (
        Dinv @ C @ g.P13h
        - Dinv @ Cr @ g.P23h
        - Dinv @ Cr @ g.P23h.T
        + Dinv @ Cr @ g.P33h
        + Br.T @ g.Q13h.T @ g.P13h
        + Br.T @ g.Q13h.T @ g.P12
        + Br.T @ g.Q23h @ g.P23h
        + Br.T @ g.Q23h @ g.P22h
        + Br.T @ g.Q33h @ g.P33h
        + Br.T @ g.Q33h @ g.P23h.T
    )
    return Xbar, Ybar, Zbar


def _deviation_matrices(g, full, rom, Dinv):
    """Deviation matrices of the natural reduction-matrix choice.

    These are the values the stationarity left-hand sides take at a
    candidate consistent with the choice ``V = P12 P22^{-1}``,
    ``W = -Q12 Q22^{-1}`` (where ``P23 = 0`` and the first two terms of each
    condition cancel).
    """
    B, C = full.B, full.C
    P22i = np.linalg.inv(g.P22h)
    Q22i = np.linalg.inv(g.Q22h)
    d1 = g.Q13h.T @ g.P13h + g.Q33h @ g.P33h
    d2 = (
        -g.Q13h.T @ g.P11
        + g.Q13h.T @ g.P12 @ P22i @ g.P12.T
        - g.Q13h.T @ g.P13h @ P22i @ g.P12.T
        - g.Q33h @ g.P13h.T
        - g.Q33h @ g.P33h @ P22i @ g.P12.T
    ) @ C.T @ Dinv.T
    d3 = Dinv.T @ (
        Dinv @ C @ g.P13h
        + Dinv @ C @ g.P12 @ P22i @ g.P33h
        + B.T @ g.Q13h @ Q22i @ g.Q13h.T @ g.P13h
        + B.T @ g.Q13h @ Q22i @ g.Q13h.T @ g.P12
        - B.T @ g.Q13h @ g.P22h
        + B.T @ g.Q13h @ g.P33h
    )
    return d1, d2, d3


def gradients(full, rom):
    """Analytic gradients of ``J = ||Hr^{-1}(H - Hr)||_H2^2``.

    Closed forms in the gramian blocks::

        dJ/dAr = 2 (Q12^T P12 + Q22 P22 + Xbar)
        dJ/dBr = 2 (Q12^T B   + Q22 Br  + Ybar)
        dJ/dCr = 2 D^{-T} (-D^{-1} C P12 + D^{-1} Cr P22 + D Zbar-terms)

    Each matches central finite differences of ``J`` entrywise; the
    stationarity left-hand sides are half the gradients.
    """
    g = compute_gramians(full, rom)
    D = full.D
    Dinv = np.linalg.solve(D, np.eye(D.shape[0]))
    Xbar, Ybar, Zbar = _theorem_terms(g, full, rom, Dinv)
    opc1 = g.Q12h.T @ g.P12 + g.Q22h @ g.P22h + Xbar
    opc2 = g.Q12h.T @ full.B + g.Q22h @ rom.B + Ybar
    opc3 = -Dinv.T @ Dinv @ full.C @ g.P12 + Dinv.T @ Dinv @ rom.C @ g.P22h + Zbar
    devs = _deviation_matrices(g, full, rom, Dinv)
    return GradientBundle(
        dJ_dAr=2.0 * opc1,
        dJ_dBr=2.0 * opc2,
        dJ_dCr=2.0 * opc3,
        Xbar=Xbar,
        Ybar=Ybar,
        Zbar=Zbar,
        opc_lhs=(opc1, opc2, opc3),
        opc_residuals=tuple(float(np.linalg.norm(M, "fro")) for M in (opc1, opc2, opc3)),
        deviations=devs,
    )


def deviations(full, candidate):
    """Deviation matrices ``(d1, d2, d3)`` of an oblique-projection candidate.

    Requires invertible ``P22`` and ``Q22`` blocks (near-singular blocks are
    the documented ill-conditioning hazard of the natural reduction-matrix
    normalization).
    """
    if not isinstance(candidate, RomCandidate):
        raise TypeError("deviations expects a RomCandidate")
    if candidate.V is None:
        raise ValueError("candidate was not produced by oblique projection (no V, W)")
    g = compute_gramians(full, candidate.rom)
    for M, name in ((g.P22h, "P22"), (g.Q22h, "Q22")):
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] < 1e-12 * max(sv[0], 1.0):
            raise SingularMatrixError(
                f"{name} is numerically singular (smallest sv {sv[-1]:.3e}); "
                "deviations are ill-conditioned"
            )
    D = full.D
    Dinv = np.linalg.solve(D, np.eye(D.shape[0]))
    return _deviation_matrices(g, full, candidate.rom, Dinv)
