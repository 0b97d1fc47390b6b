"""Latitude averages on spheres and circle averages on SU(2).

The latitude average T_delta on L2(S^n) acts on degree-l harmonics by the
normalized Gegenbauer value q_l(delta) = C_l^lam(delta)/C_l^lam(1) with
lam = (n-1)/2 (Legendre values for n = 2).  The circle average S_theta on
L2(SU(2)) acts on the spin-j block as the phi-average of the spin-j matrix
of a fixed two-parameter unitary; entries are trig polynomials in phi of
degree <= 2j, so an M-point trapezoid average with M > 2j is exact.

Norm gaps are suprema over the truncated degree range; the truncation is
always reported together with an analytic Legendre envelope for the tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.special import eval_gegenbauer, roots_jacobi


# ---------------------------------------------------------------------------
# zonal eigenvalues


def tdelta_eigenvalues(n: int, max_degree: int, delta: float) -> np.ndarray:
    """q_l(delta) for l = 0..max_degree via the three-term recurrence.

    l*C_l = 2*delta*(l+lam-1)*C_{l-1} - (l+2*lam-2)*C_{l-2}, normalised by
    C_l(1) = prod_{i<=l} (i+2*lam-1)/i (polynomial growth, no overflow).
    """
    if n < 2:
        raise ValueError("sphere dimension must be >= 2")
    if not -1.0 <= delta <= 1.0:
        raise ValueError(f"delta = {delta} outside [-1, 1]")
    lam = (n - 1) / 2.0
    vals = np.empty(max_degree + 1)
    c_prev2, c_prev1 = 1.0, 2.0 * lam * delta
    norm_prev2, norm_prev1 = 1.0, 2.0 * lam
    vals[0] = 1.0
    if max_degree >= 1:
        vals[1] = c_prev1 / norm_prev1
    for l in range(2, max_degree + 1):
        c = (2.0 * delta * (l + lam - 1.0) * c_prev1
             - (l + 2.0 * lam - 2.0) * c_prev2) / l
        norm = norm_prev1 * (l + 2.0 * lam - 1.0) / l
        vals[l] = c / norm
        c_prev2, c_prev1 = c_prev1, c
        norm_prev2, norm_prev1 = norm_prev1, norm
    return vals


def tdelta_eigenvalue(n: int, ell: int, delta: float) -> float:
    if ell < 0:
        raise ValueError("degree must be >= 0")
    return float(tdelta_eigenvalues(n, ell, delta)[ell])


def quadrature_eigenvalue(n: int, ell: int, delta: float,
                          probe: float = 0.3) -> float:
    """Independent realization of the same eigenvalue by direct averaging.

    Averages a degree-ell zonal harmonic over the latitude {<x,y> = delta}:
    with c = <x, pole>, the average reduces to a one-dimensional integral
    against the (1-u^2)^((n-3)/2) marginal, evaluated by Gauss-Jacobi
    quadrature (exact for the polynomial integrand), then divided by the
    zonal value q_ell(c) at the probe point.
    """
    if not -1.0 <= delta <= 1.0:
        raise ValueError(f"delta = {delta} outside [-1, 1]")
    lam = (n - 1) / 2.0
    zonal_at_one = eval_gegenbauer(ell, lam, 1.0)

    def q(x):
        return eval_gegenbauer(ell, lam, x) / zonal_at_one

    alpha = (n - 3) / 2.0
    nodes, weights = roots_jacobi(ell + 2, alpha, alpha)
    args = delta * probe + np.sqrt(1 - delta ** 2) * np.sqrt(1 - probe ** 2) * nodes
    avg = float(np.sum(weights * q(args)) / np.sum(weights))
    return avg / q(probe)


def legendre_envelope(ell: int, delta: float) -> float:
    """Classical uniform envelope |P_ell(delta)| <= sqrt(2/(pi*ell*(1-delta^2)))."""
    if ell <= 0 or abs(delta) >= 1.0:
        return 1.0
    return min(1.0, math.sqrt(2.0 / (math.pi * ell * (1.0 - delta * delta))))


@dataclass
class HarmonicSpectrum:
    """Tabulated action of the latitude average on harmonic subspaces."""

    sphere_dim: int
    max_degree: int
    deltas: tuple
    table: np.ndarray = field(repr=False)  # [ell, delta index]

    def eigenvalue(self, ell: int, delta: float) -> float:
        j = self.deltas.index(delta)
        return float(self.table[ell, j])

    def verify_invariants(self, tol: float = 1e-12) -> bool:
        if not np.allclose(self.table[0], 1.0, atol=tol):
            return False
        if np.max(np.abs(self.table)) > 1.0 + tol:
            return False
        for j, d in enumerate(self.deltas):
            if d == 1.0 and not np.allclose(self.table[:, j], 1.0, atol=tol):
                return False
        return True


def build_harmonic_spectrum(n: int, max_degree: int, deltas) -> HarmonicSpectrum:
    deltas = tuple(float(d) for d in deltas)
    table = np.column_stack([tdelta_eigenvalues(n, max_degree, d)
                             for d in deltas])
    return HarmonicSpectrum(n, max_degree, deltas, table)


def tdelta_norm_gap(n: int, delta: float, max_degree: int = 200) -> float:
    """sup_{l <= D} |q_l(delta) - q_l(0)|: the norm of T_delta - T_0 on the
    span of harmonics of degree <= D."""
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    e_d = tdelta_eigenvalues(n, max_degree, delta)
    e_0 = tdelta_eigenvalues(n, max_degree, 0.0)
    return float(np.max(np.abs(e_d - e_0)))


@dataclass
class TdeltaGapReport:
    sphere_dim: int
    delta: float
    max_degree: int
    value: float
    arg_degree: int
    tail_envelope: float
    holder_bound: float


def tdelta_gap_report(n: int, delta: float,
                      max_degree: int = 200) -> TdeltaGapReport:
    """Gap value plus explicit truncation data: the degree attaining the sup
    and the analytic envelope for every discarded degree."""
    e_d = tdelta_eigenvalues(n, max_degree, delta)
    e_0 = tdelta_eigenvalues(n, max_degree, 0.0)
    diffs = np.abs(e_d - e_0)
    arg = int(np.argmax(diffs))
    tail = legendre_envelope(max_degree + 1, delta) + legendre_envelope(
        max_degree + 1, 0.0)
    return TdeltaGapReport(
        sphere_dim=n, delta=delta, max_degree=max_degree,
        value=float(diffs[arg]), arg_degree=arg, tail_envelope=float(tail),
        holder_bound=2.0 * math.sqrt(abs(delta)))


# ---------------------------------------------------------------------------
# SU(2) circle averages


def su2_element(theta: float, phi: float) -> np.ndarray:
    """The displayed two-parameter special unitary; checked before use."""
    g = np.array([[np.exp(-1j * theta), -np.exp(1j * phi)],
                  [np.exp(-1j * phi), np.exp(1j * theta)]]) / np.sqrt(2.0)
    if not np.allclose(g @ g.conj().T, np.eye(2), atol=1e-12):
        raise AssertionError("internal error: matrix is not unitary")
    if abs(np.linalg.det(g) - 1.0) > 1e-12:
        raise AssertionError("internal error: determinant is not 1")
    return g


@lru_cache(maxsize=None)
def _spin_tables(two_j: int):
    """Flattened monomial table of the symmetric-power matrix.

    Entry (i2, i1) of the spin matrix is sum_k coef * a^k c^(P-k) b^(R-k)
    d^(Q-R+k) with P = two_j-i1, Q = i1, R = two_j-i2, and coefficient
    comb(P,k)*comb(Q,R-k)*sqrt(R!S!/(P!Q!)) (exact integer ratio under the
    square root)."""
    pos, pa, pc, pb, pd, coef = [], [], [], [], [], []
    dim = two_j + 1
    for i1 in range(dim):          # column: m1 = j - i1
        P = two_j - i1
        Q = i1
        for i2 in range(dim):      # row: m2 = j - i2
            R = two_j - i2
            S = i2
            scale = math.sqrt(Fraction(math.factorial(R) * math.factorial(S),
                                       math.factorial(P) * math.factorial(Q)))
            for k in range(max(0, R - Q), min(P, R) + 1):
                pos.append(i2 * dim + i1)
                pa.append(k)
                pc.append(P - k)
                pb.append(R - k)
                pd.append(Q - R + k)
                coef.append(scale * math.comb(P, k) * math.comb(Q, R - k))
    return (np.array(pos), np.array(pa), np.array(pc), np.array(pb),
            np.array(pd), np.array(coef))


def spin_matrix(two_j: int, u: np.ndarray) -> np.ndarray:
    """Spin-(two_j/2) matrix of a 2x2 unitary via the symmetric power.

    Basis ordered by weight m = j, j-1, ..., -j, so two_j = 1 returns u
    itself.  Combinatorial factors are exact integer ratios; unitarity of
    the result is asserted, not assumed.
    """
    if two_j < 0:
        raise ValueError("2j must be >= 0")
    a, b = u[0, 0], u[0, 1]
    c, d = u[1, 0], u[1, 1]
    dim = two_j + 1
    pos, pa, pc, pb, pd, coef = _spin_tables(two_j)
    pows = np.arange(two_j + 1)
    vals = (coef * (a ** pows)[pa] * (c ** pows)[pc]
            * (b ** pows)[pb] * (d ** pows)[pd])
    out = np.zeros(dim * dim, dtype=complex)
    np.add.at(out, pos, vals)
    out = out.reshape(dim, dim)
    if not np.allclose(out @ out.conj().T, np.eye(dim), atol=1e-9):
        raise AssertionError("internal error: spin matrix is not unitary")
    return out


@dataclass
class SuTwoBlock:
    two_j: int
    theta: float
    block: np.ndarray = field(repr=False)
    quadrature_points: int

    @property
    def spin(self) -> float:
        return self.two_j / 2.0


def stheta_block(two_j: int, theta: float, quadrature_points: int = 128) -> SuTwoBlock:
    """phi-average of the spin block over the M-point circle grid.

    Entry (i2, i1) of the spin matrix carries the single phi-frequency
    m2 - m1, so the M-point trapezoid average multiplies it by the grid mean
    of exp(i*(m2-m1)*phi): exactly 1 when M | (m2-m1) and 0 otherwise.  With
    M > 2j this is the phi = 0 matrix masked to its diagonal -- the exact
    value of the finite average, not a discretisation of it (the unit test
    cross-checks against the literal M-term sum).
    """
    if quadrature_points < 64:
        raise ValueError("at least 64 quadrature points required")
    if quadrature_points <= two_j:
        raise ValueError("quadrature must resolve the top phi-frequency")
    base = spin_matrix(two_j, su2_element(theta, 0.0))
    dim = two_j + 1
    m = np.arange(dim)                      # i index; weight m = j - i
    freq = m[None, :] - m[:, None]          # m2 - m1 = i1 - i2
    mask = (freq % quadrature_points == 0).astype(float)
    block = base * mask
    if np.linalg.norm(block, 2) > 1.0 + 1e-12:
        raise AssertionError("internal error: average of unitaries expanded")
    return SuTwoBlock(two_j, theta, block, quadrature_points)


def stheta_block_summed(two_j: int, theta: float,
                        quadrature_points: int = 128) -> SuTwoBlock:
    """Literal M-term average of spin matrices (slow reference path)."""
    if quadrature_points < 64:
        raise ValueError("at least 64 quadrature points required")
    dim = two_j + 1
    acc = np.zeros((dim, dim), dtype=complex)
    for k in range(quadrature_points):
        phi = 2.0 * np.pi * k / quadrature_points
        acc += spin_matrix(two_j, su2_element(theta, phi))
    return SuTwoBlock(two_j, theta, acc / quadrature_points, quadrature_points)


def stheta_norm_gap(theta: float, two_j_max: int = 40,
                    quadrature_points: int = 128,
                    base_theta: float = np.pi / 4) -> float:
    """sup over spins 2j <= two_j_max of ||block_j(theta) - block_j(base)||."""
    if two_j_max < 1:
        raise ValueError("need at least spin 1/2")
    best = 0.0
    for two_j in range(1, two_j_max + 1):
        b1 = stheta_block(two_j, theta, quadrature_points).block
        b0 = stheta_block(two_j, base_theta, quadrature_points).block
        best = max(best, float(np.linalg.norm(b1 - b0, 2)))
    return best


def spin_half_gap(theta: float, base_theta: float = np.pi / 4) -> float:
    """Closed form at spin 1/2: sqrt(2)*|sin((theta-base)/2)|."""
    return math.sqrt(2.0) * abs(math.sin((theta - base_theta) / 2.0))


def fit_stheta_constant(two_j_max: int = 40, quadrature_points: int = 128,
                        thetas=None) -> float:
    """Smallest C with gap(theta) <= C*|theta - pi/4|^(1/4) on the grid."""
    if thetas is None:
        thetas = np.linspace(0.0, 2.0 * np.pi, 41, endpoint=False)
    best = 0.0
    for th in thetas:
        dist = abs(th - np.pi / 4)
        if dist < 1e-12:
            continue
        best = max(best, stheta_norm_gap(th, two_j_max, quadrature_points)
                   / dist ** 0.25)
    return best
