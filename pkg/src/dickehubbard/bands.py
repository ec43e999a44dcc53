"""Band-structure sweeps, flat-band detection, LDOS and real-space mode profiles."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import ndtr

from .bogoliubov import TAU_Z, solve_stack
from .errors import ContractViolation, NoStableSamples, UnstableSolution
from .model import A, B, SPIN, Branch, Geometry, ModelParams, _check_k, bloch_stack, displaced_frame

__all__ = [
    "Mode", "BandStructure", "FlatBand", "LdosHistogram", "RealSpaceProfile",
    "bz_samples_1d", "bz_mesh_2d", "honeycomb_reciprocal", "band_sweep",
    "detect_flat_bands", "mode_weights", "ldos", "real_space_profile",
]

DEFAULT_SIGMA = 0.005
DEFAULT_BINS = 400
DEFAULT_WINDOW = (0.5, 1.5)
# smallest overlap accepted when following a band through a crossing
MATCH_OVERLAP = 0.9


class Mode(str, Enum):
    CAVITY_A = "cavity_a"
    CAVITY_B = "cavity_b"
    SPINS = "spins"

    @property
    def index(self) -> int:
        return {Mode.CAVITY_A: A, Mode.CAVITY_B: B, Mode.SPINS: SPIN}[self]


def bz_samples_1d(n: int = 1024) -> np.ndarray:
    """n uniform wave numbers covering [-pi, pi) once."""
    return -math.pi + 2.0 * math.pi * np.arange(n) / n


def honeycomb_reciprocal() -> np.ndarray:
    """Reciprocal vectors b1, b2 (rows) with a_i . b_j = 2 pi delta_ij."""
    a = np.array([[1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
    return 2.0 * math.pi * np.linalg.inv(a).T


def bz_mesh_2d(n: int = 256, m: int | None = None) -> np.ndarray:
    """Uniform n x m mesh of the reciprocal cell, shifted half a step off Gamma, shape (n*m, 2)."""
    m = n if m is None else m
    uu, vv = np.meshgrid((np.arange(n) + 0.5) / n, (np.arange(m) + 0.5) / m, indexing="ij")
    return np.column_stack([uu.ravel(), vv.ravel()]) @ honeycomb_reciprocal()


@dataclass(frozen=True, eq=False)
class BandStructure:
    """Positive-branch energies along a k path (or over a mesh).

    ``bands`` (n, 3) is complex; ``eigenvectors`` (n, 6, 3) are the
    tau_z-normalized particle columns of T and NaN where unstable.
    """

    params: ModelParams
    path: np.ndarray
    branch: Branch
    bands: np.ndarray
    eigenvectors: np.ndarray
    stability_mask: np.ndarray

    @property
    def all_stable(self) -> bool:
        return bool(np.all(self.stability_mask))


def _rematch(prev: np.ndarray, cur: np.ndarray) -> np.ndarray:
    """Order of the columns of ``cur`` that best continues the bands of ``prev``.

    Matches by maximal |tau_z overlap| so a band keeps its character through
    a crossing.  The permutation is only taken when every matched overlap
    exceeds MATCH_OVERLAP; an ambiguous match (a narrow avoided crossing
    resolved coarser than the path step) keeps the energy order.
    """
    overlap = np.abs(prev.conj().T @ (np.diag(TAU_Z)[:, None] * cur))
    _, perm = linear_sum_assignment(-overlap)
    if np.min(overlap[np.arange(3), perm]) < MATCH_OVERLAP:
        return np.arange(3)
    return perm


def band_sweep(params: ModelParams, path, branch: Branch = Branch.NORMAL) -> BandStructure:
    """Diagonalize at every point of ``path``; unstable points keep their complex energies."""
    branch = Branch(branch)
    path = _check_k(params, np.asarray(path, dtype=float))
    path = np.atleast_1d(path) if params.geometry is Geometry.CHAIN_1D else np.atleast_2d(path)
    if branch is Branch.SUPERRADIANT:
        displaced_frame(params)
    r = solve_stack(bloch_stack(params, path, branch=branch), check_hermitian=False)
    bands = r["energies"].copy()
    vecs = r["transform"][:, :, :3].copy()
    stable = r["stable"]
    if params.geometry is Geometry.CHAIN_1D:
        for i in range(1, len(path)):
            if stable[i] and stable[i - 1]:
                perm = _rematch(vecs[i - 1], vecs[i])
                vecs[i] = vecs[i][:, perm]
                bands[i] = bands[i][perm]
    return BandStructure(params, path, branch, bands, vecs, stable)


class FlatBand(NamedTuple):
    index: int
    energy: float
    flatness: float


def detect_flat_bands(bs: BandStructure, tol: float) -> list[FlatBand]:
    """Bands whose max - min over the path is below ``tol``."""
    if not bs.all_stable:
        raise UnstableSolution(f"{int(np.sum(~bs.stability_mask))} path points are unstable")
    e = bs.bands.real
    flatness = e.max(axis=0) - e.min(axis=0)
    return [FlatBand(j, float(e[:, j].mean()), float(flatness[j])) for j in range(3) if flatness[j] < tol]


def mode_weights(vectors: np.ndarray) -> np.ndarray:
    """Per-mode occupation of quasiparticle vectors, shape (..., 3 modes, bands).

    Uses the particle-sector amplitudes |u_n|^2 renormalized to sum to one per
    band, so every (k, band) pair carries unit weight.
    """
    u2 = np.abs(vectors[..., :3, :]) ** 2
    return u2 / u2.sum(axis=-2, keepdims=True)


@dataclass(frozen=True, eq=False)
class LdosHistogram:
    """Gaussian-broadened mode-resolved density of states.

    ``weights[b]`` is the spectral weight integrated over bin b; the weights of
    the three modes for one band add up to the number of stable samples whose
    broadened peak falls inside the energy window.
    """

    mode: Mode
    bands: tuple
    bin_edges: np.ndarray
    weights: np.ndarray
    sigma: float
    n_samples: int
    n_unstable: int
    n_outside: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def total(self) -> float:
        return float(self.weights.sum())


def _default_samples(params: ModelParams):
    return bz_samples_1d() if params.geometry is Geometry.CHAIN_1D else bz_mesh_2d()


def _select_bands(band_selector) -> tuple:
    if band_selector is None or band_selector == "all":
        return (0, 1, 2)
    if isinstance(band_selector, (int, np.integer)):
        band_selector = (int(band_selector),)
    bands = tuple(int(b) for b in band_selector)
    if not bands or any(b not in (0, 1, 2) for b in bands):
        raise ContractViolation(f"band indices must be 0, 1 or 2, got {band_selector}")
    return bands


def _stable_solutions(params, branch, k_samples):
    ks = _default_samples(params) if k_samples is None else np.asarray(k_samples, dtype=float)
    bs = band_sweep(params, ks, branch)
    n_bad = int(np.sum(~bs.stability_mask))
    if n_bad == len(bs.stability_mask):
        raise NoStableSamples(f"all {n_bad} sampled wave vectors are unstable")
    return bs, n_bad


def ldos(params: ModelParams, branch: Branch, mode: Mode, band_selector=1, k_samples=None,
         bins=DEFAULT_BINS, sigma: float = DEFAULT_SIGMA, window=DEFAULT_WINDOW) -> LdosHistogram:
    """Local density of states of one mode, summed over the selected bands and k.

    ``bins`` is a bin count over ``window`` or an explicit array of edges.
    Each (k, band) contributes its mode weight through a Gaussian of width
    ``sigma`` integrated over every bin and normalized over the window.
    Unstable k samples are skipped and counted.
    """
    mode = Mode(mode)
    bands = _select_bands(band_selector)
    if sigma <= 0.0:
        raise ContractViolation("sigma must be positive")
    edges = (np.linspace(window[0], window[1], int(bins) + 1) if np.ndim(bins) == 0
             else np.asarray(bins, dtype=float))
    bs, n_bad = _stable_solutions(params, branch, k_samples)
    ok = bs.stability_mask
    e = bs.bands.real[ok][:, bands].ravel()
    w = mode_weights(bs.eigenvectors[ok])[:, mode.index, :][:, bands].ravel()
    cdf = ndtr((edges[None, :] - e[:, None]) / sigma)
    kernel = np.diff(cdf, axis=1)
    mass = kernel.sum(axis=1)
    inside = mass > 1e-12
    kernel = kernel[inside] / mass[inside, None]
    weights = w[inside] @ kernel
    return LdosHistogram(mode, bands, edges, weights, float(sigma), int(ok.sum()), n_bad,
                         int(np.sum(~inside)))


@dataclass(frozen=True, eq=False)
class RealSpaceProfile:
    """k-averaged site occupation of one band, replicated over ``cells`` unit cells.

    ``weights`` has shape (cells, 3) with columns (cavity A, cavity B, spins).
    """

    cells: int
    band: int
    weights: np.ndarray

    @property
    def site_weights(self) -> np.ndarray:
        return self.weights[0]


def real_space_profile(params: ModelParams, branch: Branch, band: int, cells: int,
                       k_samples=None) -> RealSpaceProfile:
    """Occupation pattern of a band in real space.

    A Bloch state has the same |amplitude|^2 in every cell, so the per-cell
    pattern is the Brillouin-zone average of the mode weights.
    """
    (band,) = _select_bands(band)
    if cells < 1:
        raise ContractViolation("cells must be positive")
    bs, n_bad = _stable_solutions(params, branch, k_samples)
    if n_bad:
        raise UnstableSolution(f"band {band} is unstable at {n_bad} sampled wave vectors")
    per_k = mode_weights(bs.eigenvectors)[:, :, band]
    avg = per_k.mean(axis=0)
    return RealSpaceProfile(int(cells), band, np.tile(avg, (int(cells), 1)))
