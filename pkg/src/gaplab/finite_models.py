"""Averaging operators on l2(O_n x O_n): construction, norms, exact identities.

Every operator here has the stamp form

    M[(y,t),(x,s)] = K[(s - t - x*y) mod m],        m = p^n,

for a length-m lookup kernel K: the shift-average S_delta uses
K = delta-spike/m, the character average S_chi spreads chi over the image of
the level-h injection z -> p^(n-h)*z.  Flat index convention: (u, v) -> u*m+v
with u the space label and v the shift label.

Dense matrices are materialised from the kernel; matrix-free applies (FFT
correlation along the shift axis plus a gather) serve power iteration at
dimensions where a dense SVD is not affordable.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .residue import (AdditiveCharacter, ResidueRing, RingElem, char_eval,
                      character_decompose, classify_character, valuation)


# ---------------------------------------------------------------------------
# kernels and dense materialisation


def _as_delta_value(ring: ResidueRing, delta) -> int:
    if isinstance(delta, RingElem):
        if delta.ring != ring:
            raise ValueError("delta lives in the wrong ring")
        return delta.value
    return int(delta) % ring.modulus


def _kernel_s_delta(ring: ResidueRing, delta) -> np.ndarray:
    m = ring.modulus
    k = np.zeros(m, dtype=complex)
    k[_as_delta_value(ring, delta)] = 1.0 / m
    return k


def _kernel_s_chi(ring: ResidueRing, chi: AdditiveCharacter) -> np.ndarray:
    p, n = ring.p, ring.n
    h = chi.ring.n
    if chi.ring.p != p:
        raise ValueError("character prime differs from ring prime")
    if not (1 <= h <= n):
        raise ValueError(f"character level h={h} must satisfy 1 <= h <= n={n}")
    if chi.is_trivial:
        raise ValueError("S_chi requires a nontrivial character")
    m = ring.modulus
    step = p ** (n - h)
    k = np.zeros(m, dtype=complex)
    for z in range(p ** h):
        k[(step * z) % m] = char_eval(chi, z) / (m * p ** h)
    return k


def _shift_index(m: int, rows=None) -> np.ndarray:
    """tau[(y,t),(x,s)] = (s - t - x*y) mod m for the requested flat rows."""
    if rows is None:
        rows = np.arange(m * m)
    y = rows // m
    t = rows % m
    x = np.arange(m)
    s = np.arange(m)
    xy = (x[:, None] * y[None, :]) % m          # (m, rows)
    tau = (s[None, None, :] - t[None, :, None] - xy[:, :, None]) % m
    # axes (x, row, s) -> (row, x, s)
    return tau.transpose(1, 0, 2).reshape(len(rows), m * m)


def _materialize(ring: ResidueRing, kernel: np.ndarray) -> np.ndarray:
    m = ring.modulus
    out = np.empty((m * m, m * m), dtype=complex)
    # build in row blocks to keep the index scratch bounded
    block = max(1, (1 << 22) // (m * m))
    for start in range(0, m * m, block * m):
        rows = np.arange(start, min(start + block * m, m * m))
        out[rows] = kernel[_shift_index(m, rows)]
    return out


@dataclass
class DenseOperator:
    """A dense matrix acting on l2(O_n x O_n) with its label convention."""

    ring: ResidueRing
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def labels(self):
        m = self.ring.modulus
        return [(u, v) for u in range(m) for v in range(m)]

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        if self.ring != other.ring:
            raise ValueError("operators live on different rings")
        return DenseOperator(self.ring, self.matrix - other.matrix)

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        if self.ring != other.ring:
            raise ValueError("operators live on different rings")
        return DenseOperator(self.ring, self.matrix + other.matrix)


def build_S_delta(ring: ResidueRing, delta) -> DenseOperator:
    """S_delta f(y,t) = E_x f(x, t + delta + x*y) as a dense matrix."""
    return DenseOperator(ring, _materialize(ring, _kernel_s_delta(ring, delta)))


def build_S_chi(ring: ResidueRing, chi: AdditiveCharacter) -> DenseOperator:
    """S_chi f(y,t) = E_{x,z} chi(z) f(x, t + p^(n-h)*z + x*y), dense."""
    return DenseOperator(ring, _materialize(ring, _kernel_s_chi(ring, chi)))


# ---------------------------------------------------------------------------
# matrix-free applies


@dataclass
class StampOperator:
    """Matrix-free form of a kernel-stamp operator (same math as the dense one)."""

    ring: ResidueRing
    kernel: np.ndarray

    @property
    def dim(self) -> int:
        m = self.ring.modulus
        return m * m

    def apply(self, f: np.ndarray) -> np.ndarray:
        m = self.ring.modulus
        fm = f.reshape(m, m)
        # correlate along the shift axis:  G[x,u] = sum_s K[(s-u) mod m] f[x,s];
        # the DFT multiplier of u -> sum_w K[w] f[u+w] is m * ifft(K)
        mult = m * np.fft.ifft(self.kernel)
        g = np.fft.ifft(np.fft.fft(fm, axis=1) * mult[None, :], axis=1)
        out = np.zeros((m, m), dtype=complex)
        t = np.arange(m)
        y = np.arange(m)
        for x in range(m):
            idx = (t[None, :] + (x * y)[:, None]) % m
            out += g[x][idx]
        return out.reshape(m * m)

    def adjoint_apply(self, f: np.ndarray) -> np.ndarray:
        m = self.ring.modulus
        fm = f.reshape(m, m)         # indexed (y, t)
        # H[y,u] = sum_t conj(K)[(u-t) mod m] f[y,t]   (circular convolution)
        khat = np.fft.fft(np.conj(self.kernel))
        h = np.fft.ifft(np.fft.fft(fm, axis=1) * khat[None, :], axis=1)
        # accumulate per y:  (S* f)(x,s) = sum_y H[y, (s - x*y) mod m]
        out = np.zeros((m, m), dtype=complex)
        s = np.arange(m)
        x = np.arange(m)
        for y in range(m):
            idx = (s[None, :] - (x * y)[:, None]) % m
            out += h[y][idx]
        return out.reshape(m * m)


def stamp_s_delta(ring: ResidueRing, delta) -> StampOperator:
    return StampOperator(ring, _kernel_s_delta(ring, delta))


def stamp_s_chi(ring: ResidueRing, chi: AdditiveCharacter) -> StampOperator:
    return StampOperator(ring, _kernel_s_chi(ring, chi))


# ---------------------------------------------------------------------------
# norms


@dataclass
class NormReport:
    value: float
    method: str
    residual: float
    iterations: int
    converged: bool
    dim: int


def operator_norm(op, method: str = "auto", tolerance: float = 1e-12,
                  max_iterations: int = 5000, seed: int = 7) -> NormReport:
    """Operator norm with an explicit method report.

    * full-svd: complete singular spectrum of the dense matrix (direct SVD,
      or the eigenvalues of the Hermitian square for large dimensions --
      identical values, considerably cheaper).
    * power-iteration: Rayleigh iteration on A*A, matrix-free when the
      operand provides apply/adjoint_apply.  The returned value is a
      Rayleigh estimate (a lower envelope of the true norm) whose residual
      ||A*Av - mu v|| / sigma is reported; non-convergence inside the
      iteration cap is reported through ``converged``, never hidden.
    * exact-decomposition (stamp operators only): the shift-Fourier basis
      block-diagonalises every kernel stamp, so the norm is the maximum of
      |m^2 * ifft(K)[c]| * ||G_c|| over blocks -- m small dense SVDs instead
      of one of size m^2.
    """
    dense = None
    applier = None
    if isinstance(op, DenseOperator):
        dense = op.matrix
    elif isinstance(op, np.ndarray):
        dense = op
    elif isinstance(op, StampOperator):
        applier = op
    else:
        raise TypeError(f"cannot take the norm of {type(op)!r}")

    dim = dense.shape[0] if dense is not None else applier.dim
    method = method.lower()

    if method == "auto":
        if applier is not None:
            method = "exact-decomposition"
        elif dim <= 4096:
            method = "full-svd"
        else:
            method = "power-iteration"

    if method == "exact-decomposition":
        if applier is None:
            raise ValueError("exact-decomposition needs a kernel stamp operator")
        m = applier.ring.modulus
        coeffs = m * m * np.fft.ifft(applier.kernel)
        xy = np.outer(np.arange(m), np.arange(m)) % m
        val = 0.0
        for c in range(m):
            w = abs(coeffs[c])
            if w * 1.0 <= val:  # ||G_c|| <= 1 always; skip dominated blocks
                continue
            g = np.exp(2j * np.pi * ((c * xy) % m) / m) / m
            val = max(val, w * float(np.linalg.svd(g, compute_uv=False)[0]))
        return NormReport(float(val), "exact-decomposition", 0.0, 0, True, dim)

    if method == "full-svd":
        if dense is None:
            raise ValueError("full-svd needs a dense operator")
        if dim >= 2048:
            gram = dense.conj().T @ dense
            val = float(np.sqrt(max(np.linalg.eigvalsh(gram)[-1], 0.0)))
        else:
            val = float(np.linalg.svd(dense, compute_uv=False)[0])
        return NormReport(val, "full-svd", 0.0, 0, True, dim)

    if method != "power-iteration":
        raise ValueError(f"unknown norm method {method!r}")

    if applier is not None:
        apply_a = applier.apply
        apply_at = applier.adjoint_apply
    else:
        apply_a = lambda v: dense @ v
        apply_at = lambda v: dense.conj().T @ v

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    mu = 0.0
    res = np.inf
    iters = 0
    for iters in range(1, max_iterations + 1):
        w = apply_at(apply_a(v))
        mu = float(np.real(np.vdot(v, w)))
        res = float(np.linalg.norm(w - mu * v))
        nw = np.linalg.norm(w)
        if nw == 0:
            return NormReport(0.0, "power-iteration", 0.0, iters, True, dim)
        v = w / nw
        sigma = np.sqrt(max(mu, 0.0))
        if sigma > 0 and res / sigma <= tolerance:
            break
    sigma = float(np.sqrt(max(mu, 0.0)))
    sres = res / sigma if sigma > 0 else res
    return NormReport(sigma, "power-iteration", float(sres), iters,
                      bool(sigma > 0 and sres <= tolerance), dim)


# ---------------------------------------------------------------------------
# Fourier diagonalisation in the shift variable


@dataclass
class FourierBlocks:
    """Exact block law: in the shift-Fourier basis, S_delta acts on the
    block of the character psi_c as psi_c(delta) * G_c with
    G_c[y,x] = psi_c(x*y)/m."""

    ring: ResidueRing
    blocks: list
    block_norms: np.ndarray

    def block_coefficient(self, c: int, delta) -> complex:
        m = self.ring.modulus
        d = _as_delta_value(self.ring, delta)
        return np.exp(2j * np.pi * ((c * d) % m) / m)

    def difference_norm(self, delta, delta_prime) -> float:
        """||S_delta - S_delta'|| = max_c |psi_c(d)-psi_c(d')| * ||G_c||."""
        m = self.ring.modulus
        best = 0.0
        for c in range(m):
            gap = abs(self.block_coefficient(c, delta)
                      - self.block_coefficient(c, delta_prime))
            best = max(best, gap * float(self.block_norms[c]))
        return best

    def s_chi_norm(self, chi: AdditiveCharacter) -> float:
        """||S_chi|| = max ||G_c|| over c = -index (mod p^h): the character
        average kills every other block exactly."""
        p, n = self.ring.p, self.ring.n
        h = chi.ring.n
        ph = p ** h
        target = (-chi.index) % ph
        vals = [float(self.block_norms[c]) for c in range(self.ring.modulus)
                if c % ph == target]
        return max(vals)

    def reassemble(self, delta) -> DenseOperator:
        """Rebuild the dense S_delta from the blocks (basis-change check)."""
        m = self.ring.modulus
        c = np.arange(m)
        t = np.arange(m)
        F = np.exp(-2j * np.pi * np.outer(c, t) / m) / np.sqrt(m)
        shat = np.zeros((m * m, m * m), dtype=complex)
        for ci in range(m):
            coeff = self.block_coefficient(ci, delta)
            blk = coeff * self.blocks[ci]
            for yi in range(m):
                for xi in range(m):
                    shat[yi * m + ci, xi * m + ci] = blk[yi, xi]
        U = np.kron(np.eye(m), F)
        return DenseOperator(self.ring, U.conj().T @ shat @ U)


def fourier_diagonalize_S_delta(ring: ResidueRing) -> FourierBlocks:
    m = ring.modulus
    xy = np.outer(np.arange(m), np.arange(m)) % m
    blocks = []
    norms = np.empty(m)
    for c in range(m):
        g = np.exp(2j * np.pi * ((c * xy) % m) / m) / m
        blocks.append(g)
        norms[c] = np.linalg.svd(g, compute_uv=False)[0]
    return FourierBlocks(ring, blocks, norms)


# ---------------------------------------------------------------------------
# decomposition of shifted averages into character averages


def decompose_coefficients(a: RingElem, b: RingElem):
    """Nonzero coefficients (chi, t_chi) of p^h*(delta_a - delta_b)."""
    return [(chi, t) for chi, t in character_decompose(a, b).items()
            if abs(t) > 0.0]


def verify_S_decomposition(ring: ResidueRing, a: RingElem, b: RingElem,
                           row_block: int = 2048) -> float:
    """Max-entry residual of S_{n,delta(a)} - S_{n,delta(b)}
    = sum_chi t_chi S_{n,chi}, materialising both sides densely."""
    if a.ring != b.ring:
        raise ValueError("a, b must share a ring")
    p, n = ring.p, ring.n
    h = a.ring.n
    if a.ring.p != p or h > n:
        raise ValueError("pair ring incompatible with the operator ring")
    step = p ** (n - h)
    m = ring.modulus
    lhs_kernel = (_kernel_s_delta(ring, step * a.value)
                  - _kernel_s_delta(ring, step * b.value))
    terms = [(_kernel_s_chi(ring, chi), t) for chi, t in decompose_coefficients(a, b)]
    worst = 0.0
    for start in range(0, m * m, row_block):
        rows = np.arange(start, min(start + row_block, m * m))
        tau = _shift_index(m, rows)
        lhs = lhs_kernel[tau]
        rhs = np.zeros_like(lhs)
        for kern, t in terms:
            rhs += t * kern[tau]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


# ---------------------------------------------------------------------------
# scalar mean-transform ratio (Parseval)


def hausdorff_young_ratio(m: int, f: np.ndarray) -> float:
    """l2 ratio of character means to values for f on Z/m.

    For Hilbert-valued f the ratio equals (#G)^(-1/2) exactly: the character
    means are (1/m) * inverse DFT of f.  f may be a vector (scalar values) or
    a matrix (rows = group, columns = coordinates of the value space).
    """
    f = np.asarray(f, dtype=complex)
    if f.shape[0] != m:
        raise ValueError(f"f must have leading length {m}")
    den = float(np.linalg.norm(f))
    if den == 0.0:
        raise ValueError("f = 0: ratio undefined")
    means = np.fft.ifft(f, axis=0)
    num = float(np.linalg.norm(means))
    return num / den


def character_mean_weights(m: int, f: np.ndarray) -> np.ndarray:
    """|E_s chi_c(s) f(s)| for each character index c (diagnostic helper)."""
    f = np.asarray(f, dtype=complex)
    means = np.fft.ifft(f, axis=0)
    if means.ndim == 1:
        return np.abs(means)
    return np.linalg.norm(means, axis=1)


@dataclass
class MeanTransformReport:
    """Ratio report with the decay profile written as C * (#G)^(-epsilon).

    Hilbert-space inputs always realise C = 1, epsilon = 1/2 (Parseval);
    the alpha field records the matching slice-decay exponent 1/2.  The
    fields exist so non-Hilbert experiments can report other profiles."""

    group_order: int
    ratio: float
    C: float
    epsilon: float
    alpha: float


def hausdorff_young_report(m: int, f: np.ndarray) -> MeanTransformReport:
    ratio = hausdorff_young_ratio(m, f)
    return MeanTransformReport(group_order=m, ratio=ratio,
                               C=1.0, epsilon=0.5, alpha=0.5)


# ---------------------------------------------------------------------------
# exact rotation-conjugation identity mod p^N


def _int_det3(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def _matmul_mod(a, b, q):
    return [[sum(a[i][k] * b[k][j] for k in range(3)) % q for j in range(3)]
            for i in range(3)]


@dataclass
class KDeltaConjugation:
    ok: bool
    delta: RingElem
    omega: RingElem
    precision: int
    determinants_ok: bool
    pattern_ok: bool
    product_ok: bool


def verify_kdelta_conjugation(j: int, a: RingElem, b: RingElem,
                              x: RingElem, y: RingElem,
                              precision: int | None = None) -> KDeltaConjugation:
    """Exact check, mod p^N, that the two unipotent-corner words conjugate to
    the rotation stamp k_{p^(2j) * delta} with delta = y - a*x - b.

    The inputs live in O_n; requires j >= 1 and valuation(delta) <= n - j so
    the scaling unit omega = (sy - sa*sx - sb)/delta exists in 1 + p^j O.
    All arithmetic is integer arithmetic modulo p^N (divisions happen only
    through modular inverses of units).
    """
    ring = a.ring
    if not (b.ring == ring and x.ring == ring and y.ring == ring):
        raise ValueError("a, b, x, y must share one ring")
    if j < 1:
        raise ValueError("j must be >= 1")
    p, n = ring.p, ring.n
    sa, sb, sx, sy = a.value, b.value, x.value, y.value

    delta_val = (sy - sa * sx - sb) % p ** n
    v = valuation(p, delta_val, n)
    if v > n - j:
        raise ValueError(
            f"delta has valuation {v} > n-j = {n - j}: identity not claimed")

    N = precision if precision is not None else n + 2 * j + 4
    q = p ** N

    num = sy - sa * sx - sb                     # plain integer, may be negative
    unit = delta_val // p ** v
    omega = ((num // p ** v) * pow(unit, -1, q)) % q
    omega_inv = pow(omega, -1, q)

    alpha = [[1, -p ** j * sa, -p ** (2 * j) * sb],
             [0, 0, 1],
             [0, -1, 0]]
    beta = [[p ** (2 * j) * sy, -1, 0],
            [p ** j * sx, 0, -1],
            [1, 0, 0]]
    dets_ok = (_int_det3(alpha) == 1 and _int_det3(beta) == 1)

    left = [[omega_inv, 0, 0],
            [0, 1, 0],
            [0, (p ** j * omega * sx) % q, omega]]
    right = [[1, 0, 0],
             [0, omega, (p ** j * omega_inv * sa) % q],
             [0, 0, omega_inv]]

    prod = _matmul_mod(_matmul_mod(_matmul_mod(left, alpha, q), beta, q),
                       right, q)
    target = [[(p ** (2 * j) * delta_val) % q, (-1) % q, 0],
              [1, 0, 0],
              [0, 0, 1]]
    product_ok = prod == target

    def _is_unit_pattern(mat):
        for i in range(3):
            for k in range(3):
                want0 = (i != k)
                e = mat[i][k] % q
                if want0 and i in (1, 2) and k in (1, 2):
                    # inside the lower block off-diagonals may be p^j-divisible
                    if e % p ** j != 0:
                        return False
                elif want0:
                    if e != 0:
                        return False
                else:
                    if (e - 1) % p ** j != 0:
                        return False
        return True

    pattern_ok = _is_unit_pattern(left) and _is_unit_pattern(right)

    return KDeltaConjugation(
        ok=bool(dets_ok and product_ok and pattern_ok),
        delta=RingElem(ring, delta_val),
        omega=RingElem(ResidueRing(p, N), omega),
        precision=N,
        determinants_ok=dets_ok,
        pattern_ok=pattern_ok,
        product_ok=product_ok,
    )
