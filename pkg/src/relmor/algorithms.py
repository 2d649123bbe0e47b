"""Reduction algorithms: BT, BST, TSIA, IRHMORA, and the weighted-H2 path.

All iterative algorithms are fixed-point sweeps over oblique reduction
matrices: solve cross-gramian equations for ``V`` and ``W``, bi-orthogonalize
so that ``W^T V = I``, project, repeat until the reduced pole set stops
moving.  Each invocation is deterministic given its seed.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as spla

from .exceptions import (
    ConvergenceError,
    DimensionError,
    MinimumPhaseError,
    RiccatiError,
    SingularMatrixError,
    StabilityError,
)
from .linalg import solve_lyapunov, solve_sylvester
from .relerr import RomCandidate, delta_mul_norm, weighted_error_h2
from .sstools import (
    StateSpace,
    conjugate_inverse_of_factor,
    h2_norm,
    inverse_realization,
    regularize_d,
    relative_error_weight,
    spectral_factor,
    subtract,
)

__all__ = [
    "IterationTrace",
    "IterationRecord",
    "ReductionConfig",
    "biorthogonalize",
    "balanced_truncation",
    "balanced_stochastic_truncation",
    "tsia",
    "irhmora",
    "relative_error_h2_weighted",
    "pole_change",
    "random_initial_rom",
    "dominant_pole_rom",
]


@dataclass(frozen=True)
class IterationRecord:
    index: int
    error_norm: float
    poles: np.ndarray = field(repr=False)
    subspace_change: float


@dataclass
class IterationTrace:
    """Per-iteration history of a fixed-point reduction run."""

    records: list = field(default_factory=list)
    converged: bool = False

    def append(self, index, error_norm, poles, subspace_change):
        self.records.append(
            IterationRecord(
                index=index,
                error_norm=float(error_norm),
                poles=np.asarray(poles, dtype=complex),
                subspace_change=float(subspace_change),
            )
        )

    @property
    def iterations(self):
        return len(self.records)

    @property
    def error_norms(self):
        return [rec.error_norm for rec in self.records]


@dataclass
class ReductionConfig:
    """Knobs shared by the reduction algorithms.

    ``initial_rom`` may be a :class:`RomCandidate`, an integer seed for the
    deterministic random initializer, or None (seed 0).  ``init`` selects the
    initializer: "random" (stable diagonally dominant) or "dominant"
    (dominant-pole modal seed, selected by residue magnitude over a full
    eigendecomposition).
    """

    order: int
    max_iterations: int = 200
    epsilon: float = 0.001
    convergence_tol: float = 1e-6
    initial_rom: object = None
    init: str = "random"

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.convergence_tol <= 0:
            raise ValueError(f"convergence_tol must be positive, got {self.convergence_tol}")
        if self.init not in ("random", "dominant"):
            raise ValueError(f"unknown init strategy {self.init!r}")


def pole_change(old_poles, new_poles):
    """Relative Hausdorff distance between two conjugate-closed pole sets."""
    old_poles = np.asarray(old_poles, dtype=complex)
    new_poles = np.asarray(new_poles, dtype=complex)
    if old_poles.size == 0 and new_poles.size == 0:
        return 0.0
    if old_poles.size == 0 or new_poles.size == 0:
        return np.inf
    dists = np.abs(old_poles[:, None] - new_poles[None, :])
    h = max(float(np.max(np.min(dists, axis=1))), float(np.max(np.min(dists, axis=0))))
    scale = max(1.0, float(np.max(np.abs(old_poles))), float(np.max(np.abs(new_poles))))
    return h / scale


def biorthogonalize(V, W):
    """Transform bases so that ``W'^T V' = I`` without changing their spans.

    Both bases are first orthonormalized (QR); the correction
    ``W' = Qw (Qw^T Qv)^{-T}`` is absorbed entirely on the W side.  Pairs
    already bi-orthogonal to 1e-12 are returned unchanged (idempotence).

    Raises
    ------
    SingularMatrixError
        If ``W^T V`` is singular to tolerance; the message reports the
        smallest singular value (the cosine of the largest principal angle
        between the subspaces).
    """
    V = np.asarray(V, dtype=float)
    W = np.asarray(W, dtype=float)
    if V.shape != W.shape:
        raise DimensionError(f"V and W must have the same shape, got {V.shape} vs {W.shape}")
    r = V.shape[1]
    if np.max(np.abs(W.T @ V - np.eye(r))) <= 1e-12:
        return V, W
    Qv, _ = spla.qr(V, mode="economic")
    Qw, _ = spla.qr(W, mode="economic")
    M = Qw.T @ Qv
    smin = float(np.linalg.svd(M, compute_uv=False)[-1])
    if smin < 1e-12:
        raise SingularMatrixError(
            f"W^T V is singular to tolerance (smallest singular value {smin:.3e}); "
            "the subspaces are orthogonal in some direction"
        )
    return Qv, Qw @ np.linalg.inv(M).T


def _project(full, V, W):
    return StateSpace(W.T @ full.A @ V, W.T @ full.B, full.C @ V, full.D)


def _gramian_factor(P):
    """Symmetric factor Z with Z Z^T = P, robust to semidefinite P."""
    lam, U = np.linalg.eigh(0.5 * (P + P.T))
    lam = np.clip(lam, 0.0, None)
    return U @ np.diag(np.sqrt(lam))


def _sqrt_balance(P, X, r, what, rank_rtol=1e-12):
    """Square-root balancing of a gramian pair; returns V, W, singular values."""
    Zc = _gramian_factor(P)
    Zo = _gramian_factor(X)
    U, s, Vt = np.linalg.svd(Zo.T @ Zc)
    rank = int(np.sum(s > rank_rtol * max(s[0], 1e-300)))
    if r > rank:
        raise ValueError(
            f"requested order {r} exceeds the numerical rank {rank} of the "
            f"{what} gramian product; achievable order is {rank}"
        )
    sr = s[:r]
    V = Zc @ Vt[:r].T @ np.diag(sr**-0.5)
    W = Zo @ U[:, :r] @ np.diag(sr**-0.5)
    return V, W, s


def balanced_truncation(full, r):
    """Balanced truncation by the square-root method.

    Returns an oblique :class:`RomCandidate`; the Hankel singular values
    (descending) are in ``candidate.info["hankel_values"]``.

    Raises
    ------
    StabilityError
        If the full model is unstable.
    ValueError
        If ``r`` exceeds the numerical rank of the gramian product (the
        message names the achievable order).
    """
    if not full.is_stable:
        raise StabilityError("balanced truncation requires a stable model")
    if not 1 <= r <= full.n:
        raise ValueError(f"order must satisfy 1 <= r <= {full.n}, got {r}")
    P = solve_lyapunov(full.A, full.B @ full.B.T)
    Q = solve_lyapunov(full.A.T, full.C.T @ full.C)
    V, W, hsv = _sqrt_balance(P, Q, r, "controllability-observability")
    rom = _project(full, V, W)
    return RomCandidate(rom=rom, V=V, W=W, info={"hankel_values": hsv})


def balanced_stochastic_truncation(full, r, cfg):
    """Balanced stochastic truncation (relative-error balancing).

    Balances the controllability gramian against the Riccati solution of the
    spectral-factor equations so that ``W^T P11 W = V^T X V = diag(sigma)``
    with ``sigma_i`` the largest Hankel singular values of the phase system.
    ``D`` is regularized to ``cfg.epsilon * I`` first if rank deficient; the
    returned reduced model carries the original ``D``.

    The reduced model of a minimum-phase full model is stable and minimum
    phase; when the (regularized) full model has right-half-plane zeros the
    corresponding ``sigma_i = 1`` directions reproduce them in the reduced
    model, which is then flagged (``info["minimum_phase"]``) rather than
    rejected.
    """
    if not full.is_stable:
        raise StabilityError("balanced stochastic truncation requires a stable model")
    if not 1 <= r <= full.n:
        raise ValueError(f"order must satisfy 1 <= r <= {full.n}, got {r}")
    work = regularize_d(full, cfg.epsilon)
    _, X = spectral_factor(work)
    P11 = solve_lyapunov(work.A, work.B @ work.B.T)
    Zc = _gramian_factor(P11)
    Zo = _gramian_factor(X)
    U, sigma, Vt = np.linalg.svd(Zo.T @ Zc)
    rank = int(np.sum(sigma > 1e-12))
    if r > rank:
        raise ValueError(
            f"requested order {r} exceeds the count {rank} of Hankel values above 1e-12"
        )
    sr = sigma[:r]
    V = Zc @ Vt[:r].T @ np.diag(sr**-0.5)
    W = Zo @ U[:, :r] @ np.diag(sr**-0.5)
    rom_reg = _project(work, V, W)
    min_phase = rom_reg.is_minimum_phase
    kept_allpass = bool(np.any(sigma[:r] > 1.0 - 1e-8))
    if not min_phase and not kept_allpass:
        warnings.warn(
            "BST produced a non-minimum-phase reduced model although no "
            "all-pass (sigma = 1) direction was kept; result is numerically marginal",
            RuntimeWarning,
            stacklevel=2,
        )
    rom = StateSpace(rom_reg.A, rom_reg.B, rom_reg.C, full.D)
    return RomCandidate(
        rom=rom,
        V=V,
        W=W,
        info={
            "hankel_values": sigma,
            "epsilon_used": None if work is full else cfg.epsilon,
            "minimum_phase": min_phase,
            "regularized_rom": rom_reg,
        },
    )


def random_initial_rom(full, n_order, seed):
    """Deterministic random stable seed, scaled to the model's pole range.

    Diagonally dominant with negative diagonal entries log-spaced across the
    interquartile range of the full model's pole magnitudes.
    """
    rng = np.random.default_rng(seed)
    mags = np.abs(full.poles.eigenvalues)
    mags = mags[mags > 0]
    if mags.size:
        lo, hi = np.quantile(mags, 0.25), np.quantile(mags, 0.75)
        lo, hi = max(lo, 1e-6), max(hi, 2e-6)
        if hi / lo < 2.0:
            lo, hi = lo / 2.0, hi * 2.0
    else:
        lo, hi = 0.3, 3.0
    diag = -np.exp(np.linspace(np.log(lo), np.log(hi), n_order)) * rng.uniform(
        0.8, 1.2, n_order
    )
    Ar = np.diag(diag) + 0.05 * np.mean(np.abs(diag)) * rng.standard_normal(
        (n_order, n_order)
    )
    # Gershgorin push-back keeps the seed Hurwitz
    shift = np.max(np.sum(np.abs(Ar - np.diag(np.diag(Ar))), axis=1) + np.diag(Ar))
    if shift >= 0:
        Ar = Ar - (shift + 0.1) * np.eye(n_order)
    Br = rng.standard_normal((n_order, full.m))
    Cr = rng.standard_normal((full.m, n_order))
    return Ar, Br, Cr


def stabilize_reflection(Ar):
    """Mirror unstable eigenvalues into the open left half-plane.

    Keeps the eigenvector basis; only the real parts of offending
    eigenvalues flip sign.  Used to continue fixed-point sweeps through
    unstable intermediate iterates (the equations of the next sweep need a
    stable reduced model).  Returns ``(Ar_stable, reflected_count)``.
    """
    lam, V = np.linalg.eig(Ar)
    bad = lam.real >= 0
    if not np.any(bad):
        return Ar, 0
    lam = np.where(bad, -np.abs(lam.real) - 1e-8 + 1j * lam.imag, lam)
    try:
        Anew = np.real(V @ np.diag(lam) @ np.linalg.inv(V))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"cannot reflect unstable iterate: {exc}") from exc
    return Anew, int(np.sum(bad))


def dominant_pole_rom(full, r):
    """Modal seed spanned by the ``r`` most dominant poles.

    Dominance measure ``||C v|| ||w^H B|| / (|w^H v| |Re(lambda)|)`` over a
    full eigendecomposition; the selection is closed under conjugation.
    """
    lam, WL, VR = spla.eig(full.A, left=True, right=True)
    dom = np.empty(lam.size)
    for k in range(lam.size):
        v = VR[:, k]
        w = WL[:, k]
        res = np.linalg.norm(full.C @ v) * np.linalg.norm(w.conj() @ full.B)
        dom[k] = res / (abs(np.vdot(w, v)) * max(abs(lam[k].real), 1e-12))
    order = np.argsort(-dom)
    chosen = []
    used = np.zeros(lam.size, dtype=bool)
    for k in order:
        if used[k] or len(chosen) >= r:
            continue
        if abs(lam[k].imag) < 1e-12:
            chosen.append((k,))
            used[k] = True
        else:
            mate = np.argmin(np.abs(lam - lam[k].conj()) + 1e300 * used)
            if len(chosen) and sum(len(c) for c in chosen) + 2 > r:
                continue  # pair does not fit; keep looking for a real pole
            chosen.append((k, int(mate)))
            used[k] = used[mate] = True
        if sum(len(c) for c in chosen) == r:
            break
    cols_v, cols_w = [], []
    for group in chosen:
        k = group[0]
        if len(group) == 1:
            cols_v.append(VR[:, k].real)
            cols_w.append(WL[:, k].real)
        else:
            cols_v.extend([VR[:, k].real, VR[:, k].imag])
            cols_w.extend([WL[:, k].real, WL[:, k].imag])
    if sum(len(c) for c in chosen) < r:
        raise ValueError(f"could not assemble a conjugate-closed basis of order {r}")
    V = np.column_stack(cols_v)
    W = np.column_stack(cols_w)
    V, W = biorthogonalize(V, W)
    rom = _project(full, V, W)
    return rom.A, rom.B, rom.C


def _initial_rom(full, cfg):
    if isinstance(cfg.initial_rom, RomCandidate):
        rom = cfg.initial_rom.rom
        return np.array(rom.A), np.array(rom.B), np.array(rom.C)
    if isinstance(cfg.initial_rom, StateSpace):
        rom = cfg.initial_rom
        return np.array(rom.A), np.array(rom.B), np.array(rom.C)
    seed = 0 if cfg.initial_rom is None else int(cfg.initial_rom)
    if cfg.init == "dominant":
        return dominant_pole_rom(full, cfg.order)
    return random_initial_rom(cfg.order, full.m, seed)


def _check_order(full, cfg):
    if not 1 <= cfg.order < full.n:
        raise ValueError(f"order must satisfy 1 <= r < n = {full.n}, got {cfg.order}")
    if not full.is_stable:
        raise StabilityError("reduction requires a stable full model")


def _converged_flags(trace, tol):
    """Convergence = pole change below tol on the last recorded sweep."""
    return bool(trace.records) and trace.records[-1].subspace_change < tol


def tsia(full, cfg):
    """Two-sided iteration targeting additive-error H2 stationarity.

    Sweep: ``V`` from ``A P12 + P12 Ar^T + B Br^T = 0``, ``W`` from
    ``A^T Q12 + Q12 Ar - C^T Cr = 0``, bi-orthogonalize, project.  At a
    fixed point the projected additive-error stationarity (Wilson)
    conditions hold.  Stops when the reduced pole set moves less than
    ``cfg.convergence_tol`` (relative Hausdorff); hitting
    ``cfg.max_iterations`` returns the best iterate flagged non-converged.

    Returns
    -------
    (RomCandidate, IterationTrace)
    """
    _check_order(full, cfg)
    Ar, Br, Cr = _initial_rom(full, cfg)
    trace = IterationTrace()
    best = None
    V = W = None
    for it in range(1, cfg.max_iterations + 1):
        P12 = solve_sylvester(full.A, Ar.T, full.B @ Br.T)
        Q12 = solve_sylvester(full.A.T, Ar, -full.C.T @ Cr)
        V, W = biorthogonalize(P12, Q12)
        rom = _project(full, V, W)
        change = pole_change(np.linalg.eigvals(Ar), rom.poles.eigenvalues)
        err = h2_norm(subtract(full, rom)) if rom.is_stable else np.inf
        trace.append(it, err, rom.poles.eigenvalues, change)
        if best is None or err <= best[0]:
            best = (err, rom, V, W)
        Ar, Br, Cr = np.array(rom.A), np.array(rom.B), np.array(rom.C)
        if change < cfg.convergence_tol:
            trace.converged = True
            break
    if not trace.converged:
        err, rom, V, W = best
    candidate = RomCandidate(rom=rom, V=V, W=W, info={"algorithm": "tsia"})
    return candidate, trace


def irhmora(full, cfg):
    """Iterative relative-error H2 reduction (oblique projection sweeps).

    Each sweep builds a stable realization of the conjugate-inverse spectral
    factor of the current reduced model (reduced-order Riccati equation plus
    the factor realization chain), solves the weighted cross-gramian system
    for the reduction matrices::

        A P12 + P12 Ar^T + B Br^T = 0                      (V side)
        Agi^T Q33 + Q33 Agi + Cgi^T Cgi = 0
        A^T Q13 + Q13 Agi + C^T (Bgi^T Q33 + Dgi^T Cgi) = 0
        Ar^T Q23 + Q23 Agi - Cr^T (Bgi^T Q33 + Dgi^T Cgi) = 0
        A^T Q12 + Q12 Ar + C^T Bgi^T Q23^T - Q13 Bgi Cr
                                 - C^T Dgi^T Dgi Cr = 0    (W side)

    then bi-orthogonalizes ``V = P12``, ``W = Q12`` and projects.  ``D`` is
    regularized to ``cfg.epsilon * I`` up front if rank deficient; a Riccati
    failure mid-iteration retries once with epsilon doubled, then aborts
    with the trace attached.  Stability of the result is not guaranteed;
    the error norm per sweep is always evaluated through the stable
    conjugate-inverse factor route, so non-minimum-phase iterates are
    handled uniformly.  The returned reduced model carries the original
    ``D``; ``info`` records both D matrices and the epsilon used.

    Returns
    -------
    (RomCandidate, IterationTrace)
    """
    _check_order(full, cfg)
    epsilon = cfg.epsilon
    work = regularize_d(full, epsilon)
    regularized = work is not full
    D = np.array(work.D)
    Ar, Br, Cr = _initial_rom(full, cfg)
    trace = IterationTrace()
    retried = False
    V = W = None
    for it in range(1, cfg.max_iterations + 1):
        rom_iter = StateSpace(Ar, Br, Cr, D)
        if not rom_iter.is_stable:
            raise ConvergenceError(
                f"iterate {it} is unstable (max Re pole = "
                f"{rom_iter.poles.max_real_part:.3e}); cannot continue",
                trace=trace,
            )
        try:
            factor, _ = spectral_factor(rom_iter, branch="antistabilizing")
            weight = conjugate_inverse_of_factor(factor)
        except RiccatiError:
            if retried or not regularized:
                raise ConvergenceError(
                    f"Riccati equation failed at iterate {it} after epsilon retry",
                    trace=trace,
                )
            retried = True
            epsilon = 2.0 * epsilon
            work = StateSpace(full.A, full.B, full.C, epsilon * np.eye(full.m))
            D = np.array(work.D)
            continue
        Agi, Bgi, Cgi, Dgi = weight.A, weight.B, weight.C, weight.D
        P12 = solve_sylvester(work.A, Ar.T, work.B @ Br.T)
        Q33 = solve_lyapunov(Agi.T, Cgi.T @ Cgi)
        K = Bgi.T @ Q33 + Dgi.T @ Cgi
        Q13 = solve_sylvester(work.A.T, Agi, work.C.T @ K)
        Q23 = solve_sylvester(Ar.T, Agi, -Cr.T @ K)
        Q12 = solve_sylvester(
            work.A.T,
            Ar,
            work.C.T @ Bgi.T @ Q23.T - Q13 @ Bgi @ Cr - work.C.T @ Dgi.T @ Dgi @ Cr,
        )
        V, W = biorthogonalize(P12, Q12)
        rom = _project(work, V, W)
        change = pole_change(np.linalg.eigvals(Ar), rom.poles.eigenvalues)
        err = delta_mul_norm(work, rom, route="factor") if rom.is_stable else np.inf
        trace.append(it, err, rom.poles.eigenvalues, change)
        Ar, Br, Cr = np.array(rom.A), np.array(rom.B), np.array(rom.C)
        if change < cfg.convergence_tol:
            trace.converged = True
            break
    rom_final = StateSpace(Ar, Br, Cr, full.D)
    candidate = RomCandidate(
        rom=rom_final,
        V=V,
        W=W,
        info={
            "algorithm": "irhmora",
            "epsilon_used": epsilon if regularized else None,
            "regularized_rom": StateSpace(Ar, Br, Cr, D),
            "original_D": np.array(full.D),
            "working_D": D,
        },
    )
    return candidate, trace


def _relative_weight_for(full, weight_kind):
    """Weight realization for the relative-error-I criterion.

    "inverse" demands a minimum-phase full model (the inverse realization is
    otherwise unstable and the weighted norm unbounded); "factor" always
    returns the stable conjugate-inverse spectral factor; "auto" picks
    "inverse" when admissible.
    """
    if weight_kind == "auto":
        weight_kind = "inverse" if full.is_minimum_phase else "factor"
    if weight_kind == "inverse":
        if not full.is_minimum_phase:
            raise MinimumPhaseError(
                "full model has right-half-plane zeros: the inverse weight is "
                "unstable and the relative error unbounded; use the "
                "spectral-factor weight"
            )
        weight = inverse_realization(full)
    elif weight_kind == "factor":
        weight = relative_error_weight(full)
    else:
        raise ValueError(f"unknown weight {weight_kind!r}")
    if weight.n and not weight.is_stable:
        raise StabilityError("weight realization is unstable")
    return weight


def relative_error_h2_weighted(full, cfg, weight="auto"):
    """Weighted-H2 fixed-point reduction for the relative-error-I criterion.

    The frequency weight ``W(s)`` is the inverse realization of the full
    model when it is minimum phase, else the stable conjugate-inverse
    spectral factor (both have the spectral density ``(H H^*)^{-1}``, so for
    minimum-phase models the two routes produce the same iteration).  The
    sweep solves, with ``(Ai, Bi, Ci, Di)`` the weight realization::

        A P12 + P12 Ar^T + B Br^T = 0
        Ai^T Qi + Qi Ai + Ci^T Ci = 0                       (once)
        A^T Q13 + Q13 Ai + C^T (Bi^T Qi + Di^T Ci) = 0      (once)
        Ar^T Q23 + Q23 Ai - Cr^T (Bi^T Qi + Di^T Ci) = 0
        A^T Q12 + Q12 Ar + C^T Bi^T Q23^T - Q13 Bi Cr - C^T Di^T Di Cr = 0

    then bi-orthogonalizes ``V = P12``, ``W = Q12`` and projects.  ``D`` is
    regularized first when rank deficient; the returned reduced model
    carries the original ``D``.

    Returns
    -------
    (RomCandidate, IterationTrace)
    """
    _check_order(full, cfg)
    work = regularize_d(full, cfg.epsilon)
    regularized = work is not full
    wsys = _relative_weight_for(work, weight)
    Ai, Bi, Ci, Di = wsys.A, wsys.B, wsys.C, wsys.D
    # weight-only blocks do not change across sweeps
    Qi = solve_lyapunov(Ai.T, Ci.T @ Ci)
    K = Bi.T @ Qi + Di.T @ Ci
    Q13 = solve_sylvester(work.A.T, Ai, work.C.T @ K)
    Ar, Br, Cr = _initial_rom(work, cfg)
    trace = IterationTrace()
    V = W = None
    rom = None
    for it in range(1, cfg.max_iterations + 1):
        P12 = solve_sylvester(work.A, Ar.T, work.B @ Br.T)
        Q23 = solve_sylvester(Ar.T, Ai, -Cr.T @ K)
        Q12 = solve_sylvester(
            work.A.T,
            Ar,
            work.C.T @ Bi.T @ Q23.T - Q13 @ Bi @ Cr - work.C.T @ Di.T @ Di @ Cr,
        )
        V, W = biorthogonalize(P12, Q12)
        rom = _project(work, V, W)
        change = pole_change(np.linalg.eigvals(Ar), rom.poles.eigenvalues)
        err = weighted_error_h2(wsys, work, rom) if rom.is_stable else np.inf
        trace.append(it, err, rom.poles.eigenvalues, change)
        Ar, Br, Cr = np.array(rom.A), np.array(rom.B), np.array(rom.C)
        if change < cfg.convergence_tol:
            trace.converged = True
            break
    rom_final = StateSpace(Ar, Br, Cr, full.D)
    candidate = RomCandidate(
        rom=rom_final,
        V=V,
        W=W,
        info={
            "algorithm": "fwh2",
            "weight": weight,
            "epsilon_used": cfg.epsilon if regularized else None,
            "regularized_rom": StateSpace(Ar, Br, Cr, work.D),
        },
    )
    return candidate, trace
