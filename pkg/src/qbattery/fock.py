"""Brute-force Lindblad engine on truncated Fock spaces.

This is the ground truth for the Gaussian results and the only source of
the non-Gaussian diagnostics (purity, negativity, Liouvillian gap and the
eigen-sorted passive state). Basis states are |n_c> x |n_h> with the
charger index major, so |n_c, n_h> sits at row n_c * N_h + n_h. Operator
vectorization is row-major: vec(A X B) = (A kron B^T) vec(X).
"""

from __future__ import annotations

import dataclasses
import io
import math
from typing import Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.sparse.csgraph import connected_components

from .analytic import EnergyReport, liouvillian_stable
from .errors import (
    ConvergenceFailure,
    DegenerateNullSpace,
    InvalidParams,
    NonPhysicalState,
    StepSizeUnderflow,
)
from .fmt import format_complex
from .moments import MomentState
from .params import BatteryParams, DriveKind

MAX_LEVELS = 40
MAX_DIM = 1600
DENSE_GAP_CAP = 36
DENSE_STEADY_CAP = 16
TRUNCATION_WARNING = 1e-6
NULL_TOL = 1e-10
EIG_ZERO = 1e-10


@dataclasses.dataclass(frozen=True)
class FockConfig:
    n_c_levels: int = 10
    n_h_levels: int = 10
    rwa: bool = True

    def __post_init__(self):
        for name in ("n_c_levels", "n_h_levels"):
            n = getattr(self, name)
            if int(n) != n or not 2 <= n <= MAX_LEVELS:
                raise InvalidParams(f"{name} must be an integer in [2, {MAX_LEVELS}], got {n!r}")
        if self.dim > MAX_DIM:
            raise InvalidParams(f"Hilbert dimension {self.dim} exceeds {MAX_DIM}")

    @classmethod
    def square(cls, n: int, rwa: bool = True) -> "FockConfig":
        return cls(n, n, rwa)

    @property
    def dims(self) -> tuple:
        return (self.n_c_levels, self.n_h_levels)

    @property
    def dim(self) -> int:
        return self.n_c_levels * self.n_h_levels


@dataclasses.dataclass(frozen=True)
class FockOperators:
    c: sp.csr_matrix
    h: sp.csr_matrix
    a_c: sp.csr_matrix  # single-mode annihilators before padding
    a_h: sp.csr_matrix
    dims: tuple

    @property
    def cd(self):
        return self.c.T.tocsr()

    @property
    def hd(self):
        return self.h.T.tocsr()

    @property
    def n_c(self):
        return (self.c.T @ self.c).tocsr()

    @property
    def n_h(self):
        return (self.h.T @ self.h).tocsr()


def annihilation(n: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, shape=(n, n), format="csr")


def build_operators(cfg: FockConfig) -> FockOperators:
    nc, nh = cfg.dims
    a_c, a_h = annihilation(nc), annihilation(nh)
    c = sp.kron(a_c, sp.identity(nh), format="csr")
    h = sp.kron(sp.identity(nc), a_h, format="csr")
    return FockOperators(c, h, a_c, a_h, cfg.dims)


def hamiltonian(p: BatteryParams, ops: FockOperators) -> sp.csr_matrix:
    """Rotated-frame Hamiltonian within the rotating-wave approximation."""
    c, h, cd, hd = ops.c, ops.h, ops.cd, ops.hd
    H = p.delta * (cd @ c + hd @ h) + p.g * (cd @ h + hd @ c)
    z = p.drive_phasor
    if p.drive_kind is DriveKind.LINEAR:
        H = H + z * cd + np.conj(z) * c
    else:
        H = H + 0.5 * (z * (cd @ cd) + np.conj(z) * (c @ c))
    return sp.csr_matrix(H, dtype=complex)


def counter_rotating(p: BatteryParams, ops: FockOperators):
    """Pieces of g (e^{-2 i w t} c h + h.c.), w = omega_b - delta the drive frequency."""
    w = p.omega_b - p.delta
    ch = (p.g * (ops.c @ ops.h)).tocsr()
    return w, ch


def effective_hamiltonian(p: BatteryParams, ops: FockOperators) -> sp.csr_matrix:
    """H - (i/2) sum_k gamma_k a_k^dag a_k, the no-jump generator."""
    K = hamiltonian(p, ops) - 0.5j * p.gamma * ops.n_c
    if p.gamma_h > 0:
        K = K - 0.5j * p.gamma_h * ops.n_h
    return sp.csr_matrix(K)


def build_liouvillian(p: BatteryParams, cfg: FockConfig) -> sp.csr_matrix:
    """Sparse superoperator L with vec(d rho/dt) = L vec(rho)."""
    if not cfg.rwa:
        raise InvalidParams(
            "counter-rotating terms make the rotated-frame generator time dependent; "
            "use evolve_density for rwa=False"
        )
    ops = build_operators(cfg)
    K = effective_hamiltonian(p, ops)
    eye = sp.identity(cfg.dim, format="csr")
    L = -1j * sp.kron(K, eye) + 1j * sp.kron(eye, K.conj())
    L = L + p.gamma * sp.kron(ops.c, ops.c)
    if p.gamma_h > 0:
        L = L + p.gamma_h * sp.kron(ops.h, ops.h)
    return sp.csr_matrix(L, dtype=complex)


@dataclasses.dataclass
class DensityState:
    rho: np.ndarray
    dims: tuple
    t: float = math.nan
    saturated: bool = False

    @property
    def dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def marginals(self) -> tuple:
        nc, nh = self.dims
        r = self.rho.reshape(nc, nh, nc, nh)
        return np.einsum("ijkj->ik", r), np.einsum("ijik->jk", r)

    @property
    def top_level_population(self) -> float:
        rc, rh = self.marginals()
        return float(max(rc[-1, -1].real, rh[-1, -1].real))

    @property
    def truncation_warning(self) -> bool:
        return self.top_level_population > TRUNCATION_WARNING

    def check(self, tol: float = 1e-10) -> None:
        """Raise NonPhysicalState unless trace, Hermiticity and positivity hold."""
        if abs(np.trace(self.rho) - 1) > tol:
            raise NonPhysicalState(f"trace {np.trace(self.rho)!r} differs from 1")
        if np.abs(self.rho - self.rho.conj().T).max() > 1e-12 + tol:
            raise NonPhysicalState("density matrix is not Hermitian")
        if np.linalg.eigvalsh(self.rho).min() < -tol:
            raise NonPhysicalState("density matrix has a negative eigenvalue")

    @classmethod
    def vacuum(cls, cfg: FockConfig, t: float = 0.0) -> "DensityState":
        rho = np.zeros((cfg.dim, cfg.dim), dtype=complex)
        rho[0, 0] = 1.0
        return cls(rho, cfg.dims, t)


def _finish(rho: np.ndarray, dims, t=math.nan, saturated=False) -> DensityState:
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return DensityState(rho, tuple(dims), t, saturated)


def _resolvent(K: np.ndarray):
    """Inverse of X -> -i (K X - X K^dag) as a callable."""
    lam, V = la.eig(K)
    if np.linalg.cond(V) < 1e8:
        Vi = la.inv(V)
        ViH, VH = Vi.conj().T, V.conj().T
        den = lam[:, None] - lam.conj()[None, :]

        def apply(R):
            return V @ ((Vi @ (1j * R) @ ViH) / den) @ VH

        return apply
    # nearly defective K: Schur form and a triangular Sylvester solve instead
    T, Q = la.schur(K, output="complex")
    QH = Q.conj().T
    (trsyl,) = la.get_lapack_funcs(("trsyl",), (T,))

    def apply(R):
        Y, scale, info = trsyl(T, T, QH @ (1j * R) @ Q, trana="N", tranb="C", isgn=-1)
        if info < 0:
            raise ConvergenceFailure(f"trsyl failed with info={info}")
        return Q @ (Y / scale) @ QH

    return apply


def _steady_dense(L: sp.spmatrix, d: int) -> np.ndarray:
    _, s, vh = la.svd(L.toarray())
    if s[-2] <= NULL_TOL * max(1.0, s[0]):
        raise DegenerateNullSpace(f"null space of L is degenerate (second singular value {s[-2]:.3g})")
    return vh[-1].conj().reshape(d, d)


def _steady_gmres(p: BatteryParams, ops: FockOperators, d: int) -> np.ndarray | None:
    """Steady state from (1 + M^-1 J) X = 0, with M the no-jump part and J the jumps.

    The trace is pinned by a rank-one border along |1,0><1,0|, which the
    jump map does not annihilate. Returns None when GMRES does not converge.
    """
    K = effective_hamiltonian(p, ops).toarray()
    Minv = _resolvent(K)
    c, h = ops.c, ops.h
    nh = ops.dims[1]
    v = np.zeros((d, d), dtype=complex)
    v[nh, nh] = 1.0

    def jumps(X):
        out = p.gamma * (c @ (c @ X.conj().T).conj().T)
        if p.gamma_h > 0:
            out = out + p.gamma_h * (h @ (h @ X.conj().T).conj().T)
        return out

    def matvec(x):
        X = x.reshape(d, d)
        return (X + Minv(jumps(X)) + v * np.trace(X)).ravel()

    op = spla.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    restart = int(min(300, max(20, 6e8 / (16 * d * d))))
    x, info = spla.gmres(op, v.ravel(), rtol=1e-12, atol=0.0, restart=restart, maxiter=max(3, 3000 // restart))
    rho = x.reshape(d, d)
    if info != 0 and not np.isfinite(rho).all():
        return None
    # residual check on the full generator
    A = K @ rho
    res = -1j * (A - rho @ K.conj().T) + jumps(rho)
    if np.abs(res).max() > 1e-8 * max(1.0, np.abs(rho).max()):
        return None
    return rho


def _steady_spsolve(L: sp.spmatrix, d: int) -> np.ndarray:
    """Replace one equation by the trace condition and solve directly."""
    L = sp.lil_matrix(L)
    trace_row = np.zeros(d * d, dtype=complex)
    trace_row[:: d + 1] = 1.0
    L[0, :] = trace_row
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    return spla.spsolve(L.tocsc(), rhs).reshape(d, d)


def steady_state_density(p: BatteryParams, cfg: FockConfig) -> DensityState:
    """Null vector of the truncated Liouvillian, normalized and Hermitized.

    Above the critical amplitude the truncated system still relaxes to a
    steady state; it is returned with ``saturated`` set.
    """
    if not cfg.rwa:
        raise InvalidParams("steady states are only defined within the rotating-wave approximation")
    saturated = p.drive_kind is DriveKind.QUADRATIC and p.gamma > 0 and not liouvillian_stable(p)
    if p.omega == 0:
        return DensityState.vacuum(cfg, math.inf)
    if p.g == 0 and p.gamma_h == 0:
        raise DegenerateNullSpace("holder decoupled and lossless: every holder state is stationary")
    if p.gamma == 0 and p.gamma_h == 0:
        raise DegenerateNullSpace("no dissipation: the steady state is not unique")
    d = cfg.dim
    ops = build_operators(cfg)
    if d <= DENSE_STEADY_CAP:
        rho = _steady_dense(build_liouvillian(p, cfg), d)
    else:
        rho = _steady_gmres(p, ops, d)
        if rho is None:
            rho = _steady_spsolve(build_liouvillian(p, cfg), d)
    return _finish(rho, cfg.dims, math.inf, saturated)


def _parity_blocks(p: BatteryParams, cfg: FockConfig, rho: np.ndarray):
    """Index sets on which rho stays block diagonal under the dynamics.

    The two-photon drive, the hopping and the counter-rotating pair terms all
    conserve total excitation parity, and each jump flips it. A state that is
    block diagonal in parity therefore stays so, which halves the work.
    """
    full = [np.arange(cfg.dim)]
    if p.drive_kind is not DriveKind.QUADRATIC:
        return full
    nc, nh = cfg.dims
    parity = (np.arange(nc)[:, None] + np.arange(nh)[None, :]).ravel() % 2
    even, odd = np.flatnonzero(parity == 0), np.flatnonzero(parity == 1)
    off = rho[np.ix_(even, odd)]
    if off.size and np.abs(off).max() > 0:
        return full
    return [even, odd]


def evolve_density(
    rho0: DensityState,
    p: BatteryParams,
    cfg: FockConfig,
    t_samples: Sequence[float],
    tol: float = 1e-8,
) -> list:
    """Integrate the master equation from rho0 at t=0 and return states at t_samples.

    With ``cfg.rwa`` false the coupling also carries the counter-rotating
    pair terms, which oscillate at twice the drive frequency in this frame.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    if t_samples.size == 0:
        return []
    if np.any(np.diff(t_samples) < 0) or t_samples[0] < 0:
        raise InvalidParams("t_samples must be ascending and non-negative")
    ops = build_operators(cfg)
    K = effective_hamiltonian(p, ops).tocsr()
    jumps = [(p.gamma, ops.c)] + ([(p.gamma_h, ops.h)] if p.gamma_h > 0 else [])
    w, ch = (None, None) if cfg.rwa else counter_rotating(p, ops)
    d = cfg.dim
    rho_init = rho0.rho.astype(complex)

    blocks = _parity_blocks(p, cfg, rho_init)
    sizes = [len(b) for b in blocks]
    offsets = np.concatenate([[0], np.cumsum([n * n for n in sizes])])
    # jumps flip parity, so with two blocks block k is fed from block 1 - k
    source = [0] if len(blocks) == 1 else [1, 0]
    K_b = [K[b][:, b] for b in blocks]
    ch_b = None if ch is None else [ch[b][:, b] for b in blocks]
    jump_b = [[(rate, op[b][:, blocks[source[k]]].tocsr()) for rate, op in jumps] for k, b in enumerate(blocks)]

    def rhs(t, x):
        X = [x[offsets[k]:offsets[k + 1]].reshape(n, n) for k, n in enumerate(sizes)]
        out = np.empty_like(x)
        for k, n in enumerate(sizes):
            A = K_b[k] @ X[k]
            if ch_b is not None:
                phase = np.exp(-2j * w * t)
                A = A + (phase * ch_b[k] + np.conj(phase) * ch_b[k].T) @ X[k]
            # X is Hermitian, so X K^dag = (K X)^dag
            r = -1j * A
            r += 1j * A.conj().T
            Xs = X[source[k]]
            for rate, op in jump_b[k]:
                r += rate * (op @ (op @ Xs).conj().T).conj().T
            out[offsets[k]:offsets[k + 1]] = r.ravel()
        return out

    def pack(rho):
        return np.concatenate([rho[np.ix_(b, b)].ravel() for b in blocks])

    def unpack(x):
        rho = np.zeros((d, d), dtype=complex)
        for k, b in enumerate(blocks):
            rho[np.ix_(b, b)] = x[offsets[k]:offsets[k + 1]].reshape(len(b), len(b))
        return rho

    t_end = float(t_samples[-1])
    if t_end == 0:
        return [_finish(rho_init.copy(), cfg.dims, 0.0) for _ in t_samples]
    sol = solve_ivp(rhs, (0.0, t_end), pack(rho_init), method="RK45",
                    t_eval=t_samples, rtol=tol, atol=tol * 1e-2)  # fmt: skip
    if sol.status == -1:
        raise StepSizeUnderflow(sol.message)
    return [_finish(unpack(sol.y[:, k]), cfg.dims, float(t)) for k, t in enumerate(sol.t)]


def reduced_holder_state(state: DensityState) -> np.ndarray:
    """Partial trace over the charger."""
    return state.marginals()[1]


def reduced_charger_state(state: DensityState) -> np.ndarray:
    return state.marginals()[0]


def passive_energy_and_ergotropy(rho_h: np.ndarray, omega_b: float = 1.0) -> EnergyReport:
    """Ergotropy by pairing descending populations with ascending levels.

    No Gaussian assumption is made; ``d_value`` of the report is nan.
    """
    rho_h = np.asarray(rho_h)
    p = np.linalg.eigvalsh(0.5 * (rho_h + rho_h.conj().T))
    if p.min() < -1e-8:
        raise NonPhysicalState(f"holder state has eigenvalue {p.min()!r}")
    levels = omega_b * np.arange(len(p))
    e_h = float(np.dot(levels, np.real(np.diag(rho_h))))
    e_passive = float(np.dot(levels, np.sort(p)[::-1]))
    return EnergyReport(e_h, e_passive, e_h - e_passive, math.nan)


def purity(state: DensityState) -> float:
    return float(np.sum(np.abs(state.rho) ** 2))


def partial_transpose_holder(rho: np.ndarray, dims) -> np.ndarray:
    nc, nh = dims
    return rho.reshape(nc, nh, nc, nh).transpose(0, 3, 2, 1).reshape(nc * nh, nc * nh)


def negativity(state: DensityState, cfg: FockConfig | None = None) -> float:
    dims = cfg.dims if cfg is not None else state.dims
    ev = np.linalg.eigvalsh(partial_transpose_holder(state.rho, dims))
    return float(-ev[ev < 0].sum())


def liouvillian_spectrum(p: BatteryParams, cfg: FockConfig) -> np.ndarray:
    """Full spectrum, diagonalizing each decoupled block of L separately."""
    if cfg.dim > DENSE_GAP_CAP:
        raise InvalidParams(f"full spectrum limited to Hilbert dimension {DENSE_GAP_CAP}")
    L = build_liouvillian(p, cfg)
    n, labels = connected_components(abs(L) + abs(L.T), directed=False)
    out = []
    for k in range(n):
        idx = np.flatnonzero(labels == k)
        out.append(la.eigvals(L[idx][:, idx].toarray()))
    return np.concatenate(out)


def liouvillian_gap(p: BatteryParams, cfg: FockConfig, n_eigs: int = 20) -> float:
    """Smallest decay rate among the nonzero Liouvillian eigenvalues."""
    if cfg.dim <= DENSE_GAP_CAP:
        ev = liouvillian_spectrum(p, cfg)
    else:
        L = build_liouvillian(p, cfg).tocsc()
        k = min(n_eigs, L.shape[0] - 2)
        try:
            ev = spla.eigs(L, k=k, sigma=1e-2, which="LM", return_eigenvectors=False, tol=1e-10)
        except spla.ArpackNoConvergence as exc:
            raise ConvergenceFailure("shift-invert Arnoldi did not converge") from exc
    ev = ev[np.abs(ev) > EIG_ZERO]
    if ev.size == 0:
        raise ConvergenceFailure("no nonzero eigenvalue found")
    return float(max(-ev.real.max(), 0.0))


def expectation(op: sp.spmatrix, rho: np.ndarray) -> complex:
    """Tr(op rho) without forming the product."""
    return complex(sp.csr_matrix(op).multiply(rho.T).sum())


def moments_from_density(state: DensityState, cfg: FockConfig | None = None) -> MomentState:
    cfg = cfg or FockConfig(*state.dims)
    ops = build_operators(cfg)
    c, h, cd = ops.c, ops.h, ops.cd
    r = state.rho
    return MomentState(
        m_c=expectation(c, r),
        m_h=expectation(h, r),
        n_c=expectation(cd @ c, r).real,
        n_h=expectation(ops.hd @ h, r).real,
        u_ch=expectation(cd @ h, r),
        s_cc=expectation(c @ c, r),
        s_hh=expectation(h @ h, r),
        s_ch=expectation(c @ h, r),
        t=state.t,
    )


def coherent_state(alpha_c: complex, alpha_h: complex, cfg: FockConfig) -> DensityState:
    """Product coherent state, truncated and renormalized."""

    def ket(alpha, n):
        k = np.arange(n)
        log_fact = np.array([math.lgamma(j + 1) for j in k])
        amp = np.exp(-abs(alpha) ** 2 / 2 - 0.5 * log_fact) * np.power(complex(alpha), k)
        return amp

    psi = np.kron(ket(alpha_c, cfg.n_c_levels), ket(alpha_h, cfg.n_h_levels))
    return _finish(np.outer(psi, psi.conj()), cfg.dims, 0.0)


def density_csv(state: DensityState) -> str:
    """Two columns: row-major flat index and complex value."""
    buf = io.StringIO()
    buf.write("index,value\n")
    for i, z in enumerate(state.rho.ravel()):
        buf.write(f"{i},{format_complex(z)}\n")
    return buf.getvalue()
