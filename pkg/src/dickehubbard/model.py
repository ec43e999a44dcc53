"""Model parameters and Bloch coefficient matrices of the extended Dicke-Hubbard lattice.

Every matrix uses the Nambu ordering::

    [a_A(k), a_B(k), b(k), a_A(-k)^+, a_B(-k)^+, b(-k)^+]

where ``a_A``/``a_B`` are the two cavities of a unit cell and ``b`` is the
Holstein-Primakoff boson of the spin ensemble.  In the superradiant phase the
same slots hold the displaced operators ``c_A, c_B, d``.  Energies are in units
of the cavity frequency, hbar = 1.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import ContractViolation, ModelInvalid, SuperradiantFrameInvalid

__all__ = [
    "A", "B", "SPIN", "BASIS_ORDER", "HONEYCOMB_A1", "HONEYCOMB_A2",
    "Geometry", "Branch", "Sign", "ModelParams", "BlochMatrix", "DisplacedFrame",
    "form_factor", "build_bloch_normal", "build_bloch_super", "build_bloch",
    "displaced_frame", "bloch_stack", "wrap_k",
]

# particle-sector indices; the hole partner of mode i sits at i + 3
A, B, SPIN = 0, 1, 2
BASIS_ORDER = ("a_A(k)", "a_B(k)", "b(k)", "a_A(-k)^+", "a_B(-k)^+", "b(-k)^+")

HONEYCOMB_A1 = np.array([1.0, 0.0])
HONEYCOMB_A2 = np.array([0.5, math.sqrt(3.0) / 2.0])

# mu within this distance above 1 is treated as the critical point itself
_MU_SLACK = 1e-12


class Geometry(str, Enum):
    CHAIN_1D = "chain1d"
    HONEYCOMB_2D = "honeycomb2d"

    @property
    def dim(self) -> int:
        return 1 if self is Geometry.CHAIN_1D else 2

    @property
    def coordination(self) -> int:
        """Number of B cavities coupled to each A cavity."""
        return 2 if self is Geometry.CHAIN_1D else 3


class Branch(str, Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"


class Sign(Enum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the lattice, all in units of the cavity frequency.

    ``lam`` is the collective spin-cavity coupling (``lambda`` in configs).
    """

    omega_a: float = 1.0
    omega_b: float = 1.0
    omega_spin: float = 1.0
    zeta: float = 0.0
    lam: float = 0.0
    geometry: Geometry = Geometry.CHAIN_1D

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        for name in ("omega_a", "omega_b", "omega_spin", "zeta", "lam"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ContractViolation(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        for name in ("omega_a", "omega_b", "omega_spin"):
            if getattr(self, name) <= 0.0:
                raise ContractViolation(f"{name} must be strictly positive")
        if self.zeta < 0.0 or self.lam < 0.0:
            raise ContractViolation("zeta and lambda must be non-negative")

    @property
    def is_resonant(self) -> bool:
        return self.omega_a == self.omega_b == self.omega_spin

    def with_lambda(self, lam: float) -> ModelParams:
        return replace(self, lam=lam)

    def validity_error(self) -> str | None:
        """Return a message if the normal phase has no normalizable ground state
        even at zero spin coupling, else None.

        For the chain at resonance this is the condition |zeta/omega| < 1/4; in
        general the strongest cavity-cavity mode |f|max = z*zeta (z = coordination)
        must satisfy 4|f|max^2 < omega_A*omega_B.
        """
        z = self.geometry.coordination
        limit = math.sqrt(self.omega_a * self.omega_b) / (2.0 * z)
        if self.zeta < limit:
            return None
        if self.is_resonant:
            bound = f"1/{2 * z}"
            return (f"model ill-defined: requires |zeta/omega| < {bound} "
                    f"({self.geometry.value}), got zeta/omega = {self.zeta / self.omega_a:g}")
        return (f"model ill-defined: requires zeta < sqrt(omega_a*omega_b)/{2 * z} = {limit:g}, "
                f"got zeta = {self.zeta:g}")

    def require_valid(self) -> ModelParams:
        msg = self.validity_error()
        if msg is not None:
            raise ModelInvalid(msg)
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["geometry"] = self.geometry.value
        return d

    @classmethod
    def from_dict(cls, data: dict) -> ModelParams:
        known = {"omega_a", "omega_b", "omega_spin", "zeta", "lambda", "geometry"}
        unknown = set(data) - known
        if unknown:
            raise ContractViolation(f"unknown model fields: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k != "lambda"}
        if "lambda" in data:
            kwargs["lam"] = data["lambda"]
        return cls(**kwargs)


def wrap_k(k):
    """Reduce a 1D wave number to the first Brillouin zone [-pi, pi)."""
    return (np.asarray(k, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


def _check_k(params: ModelParams, k, single: bool = False) -> np.ndarray:
    """Validate wave-vector dimensionality; ``single`` demands exactly one k."""
    k = np.asarray(k, dtype=float)
    if params.geometry is Geometry.CHAIN_1D:
        if single and k.ndim != 0:
            raise ContractViolation(f"chain wave number must be a scalar, got shape {k.shape}")
    elif k.shape[-1:] != (2,) or (single and k.ndim != 1):
        raise ContractViolation(f"honeycomb wave vectors need 2 components, got shape {k.shape}")
    if not np.all(np.isfinite(k)):
        raise ContractViolation("wave vector must be finite")
    return k


def form_factor(params: ModelParams, k):
    """Cavity-cavity form factor f(k).

    Chain: ``-zeta (1 + e^{ik})``; honeycomb: ``-zeta (1 + e^{ik.a1} + e^{ik.a2})``.
    Scalar input gives a complex scalar, stacked input a complex array.
    """
    k = _check_k(params, k)
    if params.geometry is Geometry.CHAIN_1D:
        f = -params.zeta * (1.0 + np.exp(1j * k))
    else:
        f = -params.zeta * (1.0 + np.exp(1j * (k @ HONEYCOMB_A1)) + np.exp(1j * (k @ HONEYCOMB_A2)))
    return complex(f) if np.ndim(f) == 0 else f


@dataclass(frozen=True)
class DisplacedFrame:
    """Mean-field displacements (per sqrt(N)) and the fluctuation coefficients."""

    mu: float
    alpha_n: float
    beta_n: float
    gamma_n: float
    chi: float
    xi: float
    eta: float
    sign: Sign = Sign.PLUS


def _frame_coefficients(params: ModelParams, lam):
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = params.omega_spin * (params.omega_a - 4.0 * params.zeta**2 / params.omega_b) / (4.0 * lam**2)
        mu = np.where((mu > 1.0) & (mu <= 1.0 + _MU_SLACK), 1.0, mu)
        chi = params.omega_spin * (1.0 + mu) / (2.0 * mu)
        xi = lam * mu * np.sqrt(2.0 / (1.0 + mu))
        eta = params.omega_spin * (1.0 - mu) * (3.0 + mu) / (8.0 * mu * (1.0 + mu))
    return mu, chi, xi, eta


def displaced_frame(params: ModelParams, sign: Sign = Sign.PLUS) -> DisplacedFrame:
    if params.lam <= 0.0:
        raise ContractViolation("the displaced frame needs lambda > 0")
    mu, chi, xi, eta = (float(x) for x in _frame_coefficients(params, params.lam))
    if not 0.0 < mu <= 1.0:
        raise SuperradiantFrameInvalid(
            f"mu = {mu:.12g} outside (0, 1]: lambda = {params.lam:g} is in the normal phase")
    s = Sign(sign).value
    alpha_n = s * params.omega_spin / (2.0 * mu * params.lam) * math.sqrt((1.0 - mu * mu) / 4.0)
    beta_n = s * math.sqrt((1.0 - mu) / 2.0)
    gamma_n = 2.0 * params.zeta / params.omega_b * alpha_n
    return DisplacedFrame(mu, alpha_n, beta_n, gamma_n, chi, xi, eta, Sign(sign))


@dataclass(frozen=True, eq=False)
class BlochMatrix:
    """6x6 Hermitian coefficient matrix M(k) of H(k) = 1/2 psi^+ M psi."""

    k: object
    branch: Branch
    entries: np.ndarray
    params: ModelParams | None = None
    basis_order: tuple = field(default=BASIS_ORDER)


def _fill(f, lam_like, spin_diag, spin_pair, wa, wb):
    """Assemble a stack of matrices; every argument broadcasts to shape (n,)."""
    f, lam_like, spin_diag, spin_pair = np.broadcast_arrays(
        np.asarray(f, complex), np.asarray(lam_like, float),
        np.asarray(spin_diag, float), np.asarray(spin_pair, float))
    fc = f.conj()
    m = np.zeros(f.shape + (6, 6), dtype=complex)
    m[..., 0, 0] = m[..., 3, 3] = wa
    m[..., 1, 1] = m[..., 4, 4] = wb
    m[..., 2, 2] = m[..., 5, 5] = spin_diag
    # cavity A <-> cavity B, normal and anomalous
    m[..., 0, 1] = m[..., 0, 4] = m[..., 3, 1] = m[..., 3, 4] = f
    m[..., 1, 0] = m[..., 4, 0] = m[..., 1, 3] = m[..., 4, 3] = fc
    # cavity A <-> spin
    for i, j in ((0, 2), (0, 5), (3, 2), (3, 5)):
        m[..., i, j] = m[..., j, i] = lam_like
    m[..., 2, 5] = m[..., 5, 2] = spin_pair
    return m


def bloch_stack(params: ModelParams, k, lam=None, branch: Branch = Branch.NORMAL) -> np.ndarray:
    """Vectorized builder: matrices for every (k, lambda) pair, shape (..., 6, 6).

    ``k`` is a scalar/array of wave numbers (chain) or an (..., 2) array
    (honeycomb); ``lam`` broadcasts against the k batch shape and defaults to
    ``params.lam``.  Superradiant entries with mu > 1 come out as NaN.
    """
    f = form_factor(params, k)
    lam = params.lam if lam is None else lam
    if Branch(branch) is Branch.NORMAL:
        return _fill(f, lam, params.omega_spin, 0.0, params.omega_a, params.omega_b)
    mu, chi, xi, eta = _frame_coefficients(params, lam)
    bad = ~((mu > 0.0) & (mu <= 1.0))
    xi, chi, eta = (np.where(bad, np.nan, x) for x in (xi, chi, eta))
    return _fill(f, xi, chi + 2.0 * eta, 2.0 * eta, params.omega_a, params.omega_b)


def build_bloch_normal(params: ModelParams, k) -> BlochMatrix:
    k = _check_k(params, k, single=True)
    entries = bloch_stack(params, k, branch=Branch.NORMAL)
    return BlochMatrix(k, Branch.NORMAL, entries, params)


def build_bloch_super(params: ModelParams, k) -> BlochMatrix:
    k = _check_k(params, k, single=True)
    displaced_frame(params)  # raises in the normal phase
    entries = bloch_stack(params, k, branch=Branch.SUPERRADIANT)
    return BlochMatrix(k, Branch.SUPERRADIANT, entries, params)


def build_bloch(params: ModelParams, k, branch: Branch) -> BlochMatrix:
    if Branch(branch) is Branch.NORMAL:
        return build_bloch_normal(params, k)
    return build_bloch_super(params, k)
