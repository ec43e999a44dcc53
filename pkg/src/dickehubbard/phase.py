"""Phase boundaries, region classification and phase-diagram scans."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from skimage import measure

from .bogoliubov import spectrum_stack
from .errors import BoundaryNotFound, ContractViolation, ModelInvalid
from .model import Branch, Geometry, ModelParams, _check_k, bloch_stack

__all__ = [
    "Region", "PhaseDiagram", "lambda_sc", "boundary_normal", "boundary_super",
    "crossing_points", "classify", "scan", "intersection_g", "intersection_curve_2d",
    "honeycomb_window",
]

BISECT_TOL = 1e-10


class Region(str, Enum):
    NORMAL = "Normal"
    SUPERRADIANT = "Superradiant"
    OVERLAP = "Overlap"
    UNSTABLE = "Unstable"


def lambda_sc(params: ModelParams) -> float:
    """Critical coupling of a single unit cell, sqrt(Omega (omega_A - 4 zeta^2/omega_B)) / 2."""
    rad = params.omega_spin * (params.omega_a - 4.0 * params.zeta**2 / params.omega_b)
    if rad <= 0.0:
        raise ModelInvalid(f"cavity-cavity coupling too strong: omega_A - 4 zeta^2/omega_B = "
                           f"{rad / params.omega_spin:g} <= 0")
    return math.sqrt(rad) / 2.0


def _stable(params, k, lam, branch) -> bool:
    _, stable, _ = spectrum_stack(bloch_stack(params, k, lam, branch))
    return bool(stable)


def _bisect(params, k, lo, hi, branch, *, stable_above: bool) -> float:
    """Locate the stability flip between lo and hi to BISECT_TOL."""
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if _stable(params, k, mid, branch) == stable_above:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def boundary_normal(params: ModelParams, k) -> float:
    """Largest lambda for which the normal phase at k is stable.

    Closed form sqrt(omega^2/4 - |f(k)|^2) at resonance, bisection on the
    stability of M_nor otherwise.
    """
    k = _check_k(params, k, single=True)
    if params.is_resonant:
        if params.geometry is Geometry.CHAIN_1D:
            f2 = 2.0 * params.zeta**2 * (1.0 + math.cos(float(k)))
        else:
            kx, ky = k
            f2 = params.zeta**2 * (3.0 + 2.0 * math.cos(kx)
                                   + 4.0 * math.cos(kx / 2) * math.cos(math.sqrt(3.0) * ky / 2))
        rad = params.omega_a**2 / 4.0 - f2
        if rad < 0.0:
            raise ModelInvalid(f"normal phase unstable at k={k} even for lambda = 0 "
                               f"({params.validity_error() or 'radicand < 0'})")
        return math.sqrt(rad)
    if not _stable(params, k, 0.0, Branch.NORMAL):
        raise ModelInvalid(f"normal phase unstable at k={k} even for lambda = 0")
    hi = math.sqrt(params.omega_a * params.omega_spin)
    while _stable(params, k, hi, Branch.NORMAL):
        hi *= 2.0
    return _bisect(params, k, 0.0, hi, Branch.NORMAL, stable_above=False)


def boundary_super(params: ModelParams, k) -> float:
    """Smallest lambda >= lambda_sc where the superradiant spectrum at k is real.

    Returns lambda_sc itself when the superradiant phase is already stable at
    the single-cell critical point (the overlap zones).
    """
    k = _check_k(params, k, single=True)
    lo = lambda_sc(params)
    hi = 4.0 * lo
    if _stable(params, k, lo, Branch.SUPERRADIANT):
        return lo
    if not _stable(params, k, hi, Branch.SUPERRADIANT):
        raise BoundaryNotFound(f"superradiant phase at k={k} still unstable at lambda = {hi:g} "
                               f"(bracket [{lo:g}, {hi:g}], zeta = {params.zeta:g})")
    return _bisect(params, k, lo, hi, Branch.SUPERRADIANT, stable_above=True)


def crossing_points(n_min: int, n_max: int) -> list[tuple[float, str]]:
    """Wave numbers where the two boundaries meet: P_n = 2n pi - 4pi/3, Q_n = 2n pi - 2pi/3."""
    if n_min > n_max:
        raise ContractViolation("n_min must not exceed n_max")
    out = []
    for n in range(n_min, n_max + 1):
        out.append((2 * n * math.pi - 4 * math.pi / 3, "P"))
        out.append((2 * n * math.pi - 2 * math.pi / 3, "Q"))
    return out


def _stability_grid(params, ks, lams, branch):
    """Stability and lowest energy for every (k, lambda) pair; ks (n_k[, 2]), lams (n_l,)."""
    ks = np.asarray(ks, dtype=float)
    lams = np.asarray(lams, dtype=float)
    if params.geometry is Geometry.CHAIN_1D:
        kk = np.broadcast_to(ks[:, None], (ks.shape[0], lams.shape[0]))
    else:
        kk = np.broadcast_to(ks[:, None, :], (ks.shape[0], lams.shape[0], 2))
    ll = np.broadcast_to(lams[None, :], (ks.shape[0], lams.shape[0]))
    m = bloch_stack(params, kk, ll, branch)
    _, stable, branch_e = spectrum_stack(m)
    return stable, branch_e[..., 0]


def classify(params: ModelParams, k, lam: float) -> Region:
    k = _check_k(params, k, single=True)
    ks = k[None]
    nor, _ = _stability_grid(params, ks, [lam], Branch.NORMAL)
    sup, _ = _stability_grid(params, ks, [lam], Branch.SUPERRADIANT)
    return _label(bool(nor.flat[0]), bool(sup.flat[0]))


def _label(nor: bool, sup: bool) -> Region:
    if nor and sup:
        return Region.OVERLAP
    if nor:
        return Region.NORMAL
    if sup:
        return Region.SUPERRADIANT
    return Region.UNSTABLE


_LABEL_CODES = np.array([r.value for r in (Region.UNSTABLE, Region.SUPERRADIANT, Region.NORMAL, Region.OVERLAP)])


@dataclass(frozen=True, eq=False)
class PhaseDiagram:
    """Region labels and lowest excitation energies on a (k, lambda) grid.

    ``labels`` has shape (n_k, n_lambda) and holds :class:`Region` values as
    strings; ``lowest_energy_sup`` is NaN where
    the displaced frame does not exist (lambda < lambda_sc).
    """

    params: ModelParams
    k_axis: np.ndarray
    lambda_axis: np.ndarray
    labels: np.ndarray
    lowest_energy_nor: np.ndarray
    lowest_energy_sup: np.ndarray

    def counts(self) -> dict[str, int]:
        return {r.value: int(np.sum(self.labels == r.value)) for r in Region}


def scan(params: ModelParams, k_grid, lambda_grid, chunk: int = 65536) -> PhaseDiagram:
    """Classify every node of a k x lambda grid.

    The grid is processed as batched eigenvalue problems, ``chunk`` k-lambda
    nodes at a time; nodes are independent so the result is deterministic.
    """
    ks = _check_k(params, np.asarray(k_grid, dtype=float))
    lams = np.asarray(lambda_grid, dtype=float)
    if params.geometry is Geometry.CHAIN_1D:
        ks = np.atleast_1d(ks)
    else:
        ks = np.atleast_2d(ks)
    if ks.shape[0] == 0 or lams.ndim != 1 or lams.size == 0:
        raise ContractViolation("scan needs non-empty k and lambda grids")
    rows = max(1, chunk // lams.size)
    nor_s, nor_e, sup_s, sup_e = [], [], [], []
    for start in range(0, ks.shape[0], rows):
        part = ks[start:start + rows]
        s, e = _stability_grid(params, part, lams, Branch.NORMAL)
        nor_s.append(s)
        nor_e.append(e)
        s, e = _stability_grid(params, part, lams, Branch.SUPERRADIANT)
        sup_s.append(s)
        sup_e.append(e)
    nor = np.concatenate(nor_s)
    sup = np.concatenate(sup_s)
    labels = _LABEL_CODES[2 * nor.astype(int) + sup.astype(int)]
    return PhaseDiagram(params, ks, lams, labels, np.concatenate(nor_e), np.concatenate(sup_e))


def intersection_g(kx, ky):
    """cos kx + 2 cos(kx/2) cos(sqrt3 ky/2) + 1; zero where both 2D boundaries touch lambda_sc."""
    return np.cos(kx) + 2.0 * np.cos(kx / 2) * np.cos(math.sqrt(3.0) * ky / 2) + 1.0


def _grad_g(kx, ky):
    s3 = math.sqrt(3.0)
    gx = -np.sin(kx) - np.sin(kx / 2) * np.cos(s3 * ky / 2)
    gy = -s3 * np.cos(kx / 2) * np.sin(s3 * ky / 2)
    return gx, gy


def honeycomb_window() -> tuple[float, float, float, float]:
    """Bounding box (kx_min, kx_max, ky_min, ky_max) of the honeycomb first Brillouin zone."""
    return (-4 * math.pi / 3, 4 * math.pi / 3, -2 * math.pi / math.sqrt(3), 2 * math.pi / math.sqrt(3))


def intersection_curve_2d(params: ModelParams | None = None, k_window=None, resolution: int = 512,
                          newton_steps: int = 5, tol: float = 1e-8) -> np.ndarray:
    """Zero level set of :func:`intersection_g` by marching squares, Newton-refined.

    Returns an (n, 2) array of (kx, ky).  Points that fail to reach |g| < tol
    within ``newton_steps`` projections (only next to the saddle points where
    two branches of the curve cross) are dropped.
    """
    if params is not None and params.geometry is not Geometry.HONEYCOMB_2D:
        raise ContractViolation("the intersection curve is defined for the honeycomb lattice")
    if resolution < 8:
        raise ContractViolation("resolution must be at least 8")
    x0, x1, y0, y1 = honeycomb_window() if k_window is None else k_window
    if not (x1 > x0 and y1 > y0):
        return np.empty((0, 2))
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y0, y1, resolution)
    field = intersection_g(xs[:, None], ys[None, :])
    pieces = measure.find_contours(field, 0.0)
    if not pieces:
        return np.empty((0, 2))
    idx = np.concatenate(pieces)
    kx = x0 + idx[:, 0] * (xs[1] - xs[0])
    ky = y0 + idx[:, 1] * (ys[1] - ys[0])
    for _ in range(newton_steps):
        g = intersection_g(kx, ky)
        gx, gy = _grad_g(kx, ky)
        n2 = gx * gx + gy * gy
        step = np.where(n2 > 0.0, g / np.where(n2 > 0.0, n2, 1.0), 0.0)
        kx, ky = kx - step * gx, ky - step * gy
    pts = np.column_stack([kx, ky])
    keep = np.abs(intersection_g(kx, ky)) < tol
    pts = pts[keep]
    # marching squares emits shared vertices once per adjoining segment
    _, first = np.unique(np.round(pts, 12), axis=0, return_index=True)
    return pts[np.sort(first)]
