"""Independent reference computations used by the test-suite.

Nothing here imports the package: closed forms are written out directly and
the pairing oracle works from the ground-state covariance of the quadratures
instead of a Bogoliubov transform.  Frozen constants were evaluated with
mpmath at 30 digits.
"""
import math

import numpy as np
from scipy.linalg import sqrtm

S3 = math.sqrt(3.0)

# zeta = 0.18, omega = 1
LAMBDA_SC_018 = 0.466476151587624037669932230204
BOUNDARY_NORMAL_K0_018 = 0.34698703145794944824649988554
# lambda = 0.3, zeta = 0.18
LOWER_K0_03 = 0.250539495671244362598129044263
BANDS_KPI_03 = (0.632455532033675866399778708887, 1.0, 1.26491106406735173279955741777)
# lambda = 0.542, zeta = 0.18 (superradiant frame)
MU_0542 = 0.740730654539017714900396236435
CHI_0542 = 1.17500919117647058823529411765
XI_0542 = 0.430337124535809479740698322572
ETA_0542 = 0.09402118652774448223137472697
ALPHA_0542 = 0.418332666206778490119809006109
BETA_0542 = 0.360048153349647305964028432628
GAMMA_0542 = 0.150599759834440256443131242199
# honeycomb, zeta = 0.12
LOWER_GAMMA_2D = 0.0982167386386059194221561439522
LAMBDA_SC_2D_012 = 0.485386443980463879621263526676
# zeta = 0.1
LAMBDA_SC_010 = 0.489897948556635619639456814941


def f2_chain(zeta, k):
    return 2.0 * zeta**2 * (1.0 + np.cos(k))


def f2_honeycomb(zeta, kx, ky):
    return zeta**2 * (3.0 + 2.0 * np.cos(kx) + 4.0 * np.cos(kx / 2) * np.cos(S3 * ky / 2))


def resonant_bands(f2, lam, w=1.0):
    """(lower, flat, upper) at omega_A = omega_B = Omega = w."""
    r = np.sqrt(f2 + lam**2)
    lower = np.sqrt(np.asarray(w * w - 2.0 * w * r, dtype=complex))
    upper = np.sqrt(w * w + 2.0 * w * r)
    return np.stack(np.broadcast_arrays(lower, np.full_like(lower, w), upper + 0j), axis=-1)


def vacuum_pairing(m):
    """<a_i a_j> in the ground state of 1/2 psi^+ M psi for a real symmetric M.

    With x = (a + a^+)/sqrt2, p = (a - a^+)/(i sqrt2) the Hamiltonian reads
    1/2 x^T V x + 1/2 p^T W p, V = A + B, W = A - B.  The Gaussian ground state
    has <xx> = W^1/2 Q^-1/2 W^1/2 / 2 and <pp> = W^-1/2 Q^1/2 W^-1/2 / 2 with
    Q = W^1/2 V W^1/2, and <a a> = (<xx> - <pp>)/2.
    """
    m = np.asarray(m)
    assert np.allclose(m.imag, 0.0)
    m = m.real
    a, b = m[:3, :3], m[:3, 3:]
    v, w = a + b, a - b
    wh = np.real(sqrtm(w))
    whi = np.linalg.inv(wh)
    q = wh @ v @ wh
    qh = np.real(sqrtm(q))
    xx = 0.5 * wh @ np.linalg.inv(qh) @ wh
    pp = 0.5 * whi @ qh @ whi
    return 0.5 * (xx - pp)


def nambu_matrix(diag, f, lam_like, spin_pair=0.0):
    """Literal construction of the 6x6 Bloch matrix from its entry list."""
    wa, wb, ws = diag
    m = np.zeros((6, 6), dtype=complex)
    for i, e in enumerate((wa, wb, ws, wa, wb, ws)):
        m[i, i] = e
    for i, j in ((0, 1), (0, 4), (3, 1), (3, 4)):
        m[i, j] = f
        m[j, i] = np.conj(f)
    for i, j in ((0, 2), (0, 5), (3, 2), (3, 5)):
        m[i, j] = m[j, i] = lam_like
    m[2, 5] = m[5, 2] = spin_pair
    return m
