"""Symplectic (bosonic Bogoliubov) diagonalization of the 6x6 Bloch matrices.

The dynamical matrix ``D = tau_z M`` is eigen-decomposed directly and the
eigenvectors are rescaled so that ``T^+ tau_z T = tau_z``.  Unlike Colpa's
Cholesky route this keeps working past a phase boundary, where M is no longer
positive definite and the spectrum turns complex.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, NotApplicable, UnstableSolution
from .model import A, B, SPIN, BlochMatrix, Branch, Geometry, ModelParams, _check_k

__all__ = [
    "TAU_Z", "CHIRAL", "REAL_TOL", "DEGENERACY_TOL",
    "BandSolution", "PairingSet", "diagonalize", "solve_stack", "spectrum_stack",
    "analytic_bands_normal", "chiral_defect", "pairing_correlators",
]

TAU_Z = np.diag([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
CHIRAL = np.diag([-1.0, 1.0, 1.0, -1.0, 1.0, 1.0])

REAL_TOL = 1e-9
DEGENERACY_TOL = 1e-12
# eigenvalues closer than this are re-solved together (see _resolve_clusters)
CLUSTER_TOL = 1e-5
# smallest |E| still counted as a proper (non-zero) mode; a zero mode at a
# critical point is a Jordan block whose eigenvalue is only resolved to
# sqrt(eps) ~ 1e-8, so the cutoff sits above that
ZERO_MODE_TOL = 1e-7
HERMITIAN_TOL = 1e-12

_TZ = np.diag(TAU_Z)


@dataclass(frozen=True, eq=False)
class BandSolution:
    """Result of :func:`diagonalize`.

    ``energies`` are the three positive-branch excitation energies sorted by
    real part; they are complex only when ``stable`` is False.  ``transform``
    holds T with particle columns first (ascending energy) followed by their
    hole partners; it is NaN for unstable solutions.
    """

    k: object
    branch: Branch
    energies: np.ndarray
    full_spectrum: np.ndarray
    transform: np.ndarray
    stable: bool
    max_imag: float

    @property
    def lowest(self) -> complex:
        return complex(self.energies[0])

    @property
    def particle_vectors(self) -> np.ndarray:
        """Columns of T for the three quasiparticles, shape (6, 3)."""
        return self.transform[:, :3]


def _real_mask(w: np.ndarray) -> np.ndarray:
    """Per-matrix stability test on a stack of eigenvalues (..., 6)."""
    real = np.abs(w.imag) < REAL_TOL * np.maximum(1.0, np.abs(w.real))
    nonzero = np.abs(w) > ZERO_MODE_TOL
    return np.all(real & nonzero, axis=-1)


def _positive_branch(w: np.ndarray) -> np.ndarray:
    """Pick three eigenvalues as the positive branch, sorted by (Re, Im).

    Used for unstable spectra: the largest three under (Re, Im) ordering, so a
    purely imaginary pair contributes +i|E|, the principal square-root branch.
    """
    order = np.lexsort((-w.imag, -w.real), axis=-1)[..., :3]
    top = np.take_along_axis(w, order, axis=-1)
    # sort ascending by real part, then imaginary part
    order2 = np.lexsort((top.imag, top.real), axis=-1)
    return np.take_along_axis(top, order2, axis=-1)


def spectrum_stack(entries: np.ndarray):
    """Eigenvalues only, for large stability scans.

    Returns ``(eigenvalues (..., 6), stable (...), positive_branch (..., 3))``.
    NaN matrices (e.g. superradiant entries with mu > 1) are reported unstable.
    """
    entries = np.asarray(entries, dtype=complex)
    finite = np.all(np.isfinite(entries), axis=(-2, -1))
    safe = np.where(finite[..., None, None], entries, 0.0)
    w = np.linalg.eigvals(_TZ[:, None] * safe)
    w = np.where(finite[..., None], w, np.nan + 0j)
    stable = _real_mask(w) & finite
    return w, stable, _positive_branch(w)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    """Make the largest component of every column real and positive (deterministic gauge)."""
    idx = np.argmax(np.abs(v) - 1e-12 * np.arange(v.shape[-2])[:, None], axis=-2)
    pivot = np.take_along_axis(v, idx[..., None, :], axis=-2)
    return v * (np.abs(pivot) / pivot)


def _tz_norms(v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,i,...ij->...j", v.conj(), _TZ, v).real


def _cluster_bounds(w: np.ndarray):
    """Split sorted real eigenvalues into runs closer than CLUSTER_TOL."""
    bounds, start = [], 0
    while start < len(w):
        stop = start + 1
        while stop < len(w) and w[stop] - w[stop - 1] < CLUSTER_TOL * max(1.0, abs(w[stop])):
            stop += 1
        bounds.append((start, stop))
        start = stop
    return bounds


def _resolve_clusters(m: np.ndarray, w: np.ndarray, v: np.ndarray):
    """tau_z-orthonormalize eigenvectors of one matrix inside near-degenerate clusters.

    Eigenvectors of nearly equal eigenvalues are only accurate up to
    eps / gap, so each cluster is re-solved by Rayleigh-Ritz inside its span.
    Exactly degenerate levels get a deterministic basis.  Returns (vectors
    (6, 6), norms (6,)) or None when some mode has vanishing tau_z norm.
    """
    order = np.argsort(w.real)
    w, v = w.real[order], v[:, order]
    out_v = []
    for start, stop in _cluster_bounds(w):
        block = v[:, start:stop]
        gram = block.conj().T @ (_TZ[:, None] * block)
        g, q = np.linalg.eigh(gram)
        if np.min(np.abs(g)) < 1e-10 * np.max(np.abs(g)):
            return None
        block = block @ q / np.sqrt(np.abs(g))
        for sign in (1.0, -1.0):
            sel = block[:, np.sign(g) == sign]
            if sel.shape[1] > 1:
                h, r = np.linalg.eigh(sel.conj().T @ m @ sel)
                sel = sel @ r
                if h[-1] - h[0] < DEGENERACY_TOL * max(1.0, abs(h[-1])):
                    # deterministic basis: descending cavity-B weight, then spin weight
                    hb = sel.conj().T @ (np.isin(np.arange(6), (B, B + 3))[:, None] * sel)
                    _, r = np.linalg.eigh(hb)
                    sel = sel @ r[:, ::-1]
                    wb = np.sum(np.abs(sel[[B, B + 3]]) ** 2, axis=0)
                    ws = np.sum(np.abs(sel[[SPIN, SPIN + 3]]) ** 2, axis=0)
                    sel = sel[:, np.lexsort((-np.round(ws, 12), -np.round(wb, 12)))]
            out_v.append(sel)
    vecs = np.concatenate(out_v, axis=1)
    return vecs, _tz_norms(vecs)


def _assemble(m, w, v):
    """Build (energies, T) for one stable matrix from its eigenpairs, or None."""
    norms = _tz_norms(v)
    ws = np.sort(w.real)
    if np.any(np.diff(ws) < CLUSTER_TOL * np.maximum(1.0, np.abs(ws[1:]))):
        res = _resolve_clusters(m, w, v)
        if res is None:
            return None
        v, norms = res
    else:
        if np.min(np.abs(norms)) < 1e-10 * np.max(np.abs(norms)):
            return None
        v = v / np.sqrt(np.abs(norms))
    particle = norms > 0
    if particle.sum() != 3:
        return None
    # Rayleigh quotient: second-order accurate energies from first-order vectors
    e = np.einsum("ij,ik,kj->j", v.conj(), m, v).real * np.sign(norms)
    pi = np.flatnonzero(particle)
    hi = np.flatnonzero(~particle)
    pi = pi[np.argsort(e[pi], kind="stable")]
    hi = hi[np.argsort(-e[hi], kind="stable")]
    t = _phase_fix(v[:, np.concatenate([pi, hi])])
    return e[pi], t


def _assemble_fast(m, v):
    """Vectorized :func:`_assemble` for matrices without degenerate eigenvalues."""
    norms = _tz_norms(v)
    a = np.abs(norms)
    ok = np.min(a, axis=1) >= 1e-10 * np.max(a, axis=1)
    v = v / np.sqrt(np.where(a > 0.0, a, 1.0))[:, None, :]
    particle = norms > 0
    ok &= particle.sum(axis=1) == 3
    e = np.einsum("rij,rik,rkj->rj", v.conj(), m, v).real * np.sign(norms)
    order = np.lexsort((np.where(particle, e, -e), ~particle), axis=-1)
    t = _phase_fix(np.take_along_axis(v, order[:, None, :], axis=2))
    e = np.take_along_axis(e, order[:, :3], axis=1)
    return e, t, ok


def solve_stack(entries: np.ndarray, check_hermitian: bool = True):
    """Batched diagonalization of an (n, 6, 6) stack.

    Returns a dict of arrays: ``energies`` (n, 3) complex, ``transform``
    (n, 6, 6), ``stable`` (n,), ``max_imag`` (n,), ``full_spectrum`` (n, 6).
    """
    entries = np.asarray(entries, dtype=complex)
    if entries.ndim != 3 or entries.shape[1:] != (6, 6):
        raise ContractViolation(f"expected an (n, 6, 6) stack, got {entries.shape}")
    n = entries.shape[0]
    finite = np.all(np.isfinite(entries), axis=(1, 2))
    if check_hermitian and np.any(finite):
        dev = np.max(np.abs(entries[finite] - entries[finite].conj().transpose(0, 2, 1)), axis=(1, 2))
        scale = np.maximum(1.0, np.max(np.abs(entries[finite]), axis=(1, 2)))
        if np.any(dev > HERMITIAN_TOL * scale):
            raise ContractViolation(f"coefficient matrix is not Hermitian (max deviation {dev.max():.3g})")
    safe = np.where(finite[:, None, None], entries, 0.0)
    w, v = np.linalg.eig(_TZ[:, None] * safe)
    w = np.where(finite[:, None], w, np.nan + 0j)
    stable = _real_mask(w) & finite
    energies = _positive_branch(w)
    transform = np.full((n, 6, 6), np.nan + 0j)
    max_imag = np.max(np.abs(w.imag), axis=1)

    ws = np.sort(w.real, axis=1)
    degenerate = np.any(np.diff(ws, axis=1) < CLUSTER_TOL * np.maximum(1.0, np.abs(ws[:, 1:])), axis=1)
    fast = np.flatnonzero(stable & ~degenerate)
    if fast.size:
        e, t, ok = _assemble_fast(safe[fast], v[fast])
        stable[fast[~ok]] = False
        energies[fast[ok]] = e[ok]
        transform[fast[ok]] = t[ok]
    for i in np.flatnonzero(stable & degenerate):
        res = _assemble(safe[i], w[i], v[i])
        if res is None:
            stable[i] = False
            continue
        energies[i] = res[0]
        transform[i] = res[1]
    order = np.lexsort((w.imag, w.real), axis=-1)
    full = np.take_along_axis(w, order, axis=-1)
    return {"energies": energies, "transform": transform, "stable": stable,
            "max_imag": max_imag, "full_spectrum": full}


def diagonalize(m: BlochMatrix | np.ndarray) -> BandSolution:
    """Symplectically diagonalize one Bloch matrix.

    A raw 6x6 array is accepted and tagged as normal phase with k = None.
    """
    if isinstance(m, BlochMatrix):
        entries, k, branch = m.entries, m.k, m.branch
    else:
        entries, k, branch = np.asarray(m), None, Branch.NORMAL
    if entries.shape != (6, 6):
        raise ContractViolation(f"expected a 6x6 matrix, got {entries.shape}")
    if not np.all(np.isfinite(entries)):
        raise ContractViolation("matrix has non-finite entries")
    r = solve_stack(entries[None])
    return BandSolution(k, branch, r["energies"][0], r["full_spectrum"][0], r["transform"][0],
                        bool(r["stable"][0]), float(r["max_imag"][0]))


def analytic_bands_normal(params: ModelParams, k) -> np.ndarray:
    """Closed-form normal-phase energies (lower, flat, upper) at resonance.

    Past the normal-phase boundary the lower branch is the principal complex
    square root, i.e. purely imaginary.  Stacked k gives shape (..., 3).
    """
    if not params.is_resonant:
        raise NotApplicable("closed-form bands assume omega_A = omega_B = Omega; use diagonalize")
    w = params.omega_a
    kk = _check_k(params, k)
    if params.geometry is Geometry.CHAIN_1D:
        f2 = 2.0 * params.zeta**2 * (1.0 + np.cos(kk))
    else:
        kx, ky = kk[..., 0], kk[..., 1]
        f2 = params.zeta**2 * (3.0 + 2.0 * np.cos(kx) + 4.0 * np.cos(kx / 2) * np.cos(np.sqrt(3.0) * ky / 2))
    r = np.sqrt(f2 + params.lam**2)
    lower = np.sqrt(np.asarray(w * w - 2.0 * w * r, dtype=complex))
    upper = np.sqrt(np.asarray(w * w + 2.0 * w * r, dtype=complex))
    return np.stack(np.broadcast_arrays(lower, np.full_like(lower, w), upper), axis=-1)


def _onsite(entries: np.ndarray) -> np.ndarray:
    """On-site energies: diagonal minus the same-mode pairing amplitude.

    A same-mode pairing 2*eta enters as eta (d + d^+)^2, which also adds 2*eta
    to the diagonal; that shift belongs to the interaction, not to the bare
    excitation energy.
    """
    diag = np.diagonal(entries, axis1=-2, axis2=-1).copy()
    pair = np.stack([entries[..., i, i + 3] for i in range(3)], axis=-1)
    diag[..., :3] -= pair
    diag[..., 3:] -= pair.conj()
    return diag


def chiral_defect(m: BlochMatrix | np.ndarray) -> float:
    """Frobenius norm of {C, M_int} with C = diag(-1, 1, 1, -1, 1, 1)."""
    entries = m.entries if isinstance(m, BlochMatrix) else np.asarray(m, dtype=complex)
    m_int = entries - np.diag(_onsite(entries))
    c = np.diag(CHIRAL)
    anti = (c[:, None] + c[None, :]) * m_int
    return float(np.linalg.norm(anti))


_MODE_NAMES = ("A", "B", "spin")


@dataclass(frozen=True)
class PairingSet:
    """Ground-state pairings <psi_i(k) psi_j(-k)> in the active phase's frame.

    ``matrix[i, j]`` uses mode order (A, B, spin).  In the superradiant phase
    these are displaced-frame (c, d) correlators.
    """

    k: object
    branch: Branch
    matrix: np.ndarray

    @property
    def ab_pairing(self) -> complex:
        """<a_A(k) b(-k)> (cavity A with spin boson)."""
        return complex(self.matrix[A, SPIN])

    @property
    def spin_pairing(self) -> complex:
        return complex(self.matrix[SPIN, SPIN])

    @property
    def cavity_pairing(self) -> complex:
        return complex(self.matrix[A, B])

    def as_dict(self) -> dict:
        return {(_MODE_NAMES[i], _MODE_NAMES[j]): complex(self.matrix[i, j])
                for i in range(3) for j in range(i, 3)}


def pairing_correlators(sol: BandSolution) -> PairingSet:
    """Anomalous vacuum correlators from the particle columns of T.

    With psi = T phi and the quasiparticle vacuum, <psi psi^+> = T P T^+ where P
    projects on the particle sector; the upper-right block is <psi(k) psi(-k)>.
    """
    if not sol.stable:
        raise UnstableSolution(f"no Bogoliubov vacuum at k={sol.k}: max |Im E| = {sol.max_imag:.3g}")
    t = sol.transform
    u, v = t[:3, :3], t[3:, :3]
    return PairingSet(sol.k, sol.branch, u @ v.conj().T)
