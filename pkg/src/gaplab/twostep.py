"""Finite group models, measures on them, and two-step representations.

A `FiniteGroupModel` is a multiplication table with a word metric coming from
a declared symmetric generating set.  `FiniteMeasure` holds a dense (possibly
signed) weight vector; convolution and the left regular matrix are exact
index arithmetic.  A `TwoStepRep` carries two once-composable map families
pi0: X0 -> X1 and pi1: X1 -> X2 satisfying

    pi1(g g') pi0(g'') == pi1(g) pi0(g' g'')

together with a growth certificate (L, s) bounding ||pi_i(g)|| <= L e^{s l(g)}.
On top of these sit geometric-decay profiles for powers of a probability
measure, the property-star verification report, and the local comparison
estimate against the regular representation.
"""
import math
from dataclasses import dataclass
from itertools import permutations
from typing import NamedTuple, Optional

import numpy as np

_RELATION_TOL = 1e-10
_REGULAR_CAP = 400
_EXHAUSTIVE_ORDER = 64
_NOISE_FLOOR = 100 * np.finfo(float).eps

__all__ = [
    "FiniteGroupModel",
    "FiniteMeasure",
    "TwoStepRep",
    "StarReport",
    "GapProfile",
    "LocalEstimate",
    "cyclic_model",
    "symmetric_model",
    "sl3_f2_model",
    "convolve",
    "convolution_powers",
    "left_regular_matrix",
    "apply_measure",
    "sandwich_twostep",
    "sandwich_limit",
    "spectral_gap_profile",
    "verify_star_instance",
    "local_estimate_check",
    "cusp_measure_bound",
]


def _opnorm(m):
    return float(np.linalg.norm(np.asarray(m), 2))


class FiniteGroupModel:
    """A finite group given by its multiplication table, with a word metric.

    Elements are integers 0..order-1.  The generating set must be symmetric
    (closed under inversion) and generate the group; word lengths come from
    breadth-first search, which makes l(g^{-1}) = l(g) and the triangle
    inequality automatic.  Tables of order <= 64 are checked for the group
    axioms on construction; call `check_axioms` explicitly for larger ones.
    """

    def __init__(self, name, mult, generators, labels=None):
        mult = np.asarray(mult, dtype=np.int64)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1]:
            raise ValueError("multiplication table must be square")
        n = mult.shape[0]
        if n == 0 or mult.min() < 0 or mult.max() >= n:
            raise ValueError("table entries must index elements")
        self.name = name
        self.mult = mult
        self.order = n
        idx = np.arange(n)
        ident = [e for e in range(n)
                 if np.array_equal(mult[e], idx)
                 and np.array_equal(mult[:, e], idx)]
        if len(ident) != 1:
            raise ValueError("table needs exactly one two-sided identity")
        self.identity = int(ident[0])
        inverse = np.full(n, -1, dtype=np.int64)
        for g in range(n):
            hits = np.nonzero(mult[g] == self.identity)[0]
            if hits.size != 1 or mult[hits[0], g] != self.identity:
                raise ValueError(f"element {g} has no two-sided inverse")
            inverse[g] = hits[0]
        self.inverse = inverse
        gens = sorted({int(g) for g in generators})
        if any(not 0 <= g < n for g in gens):
            raise ValueError("generator indices out of range")
        if not gens and n > 1:
            raise ValueError("nontrivial group needs generators")
        if {int(inverse[g]) for g in gens} != set(gens):
            raise ValueError("generating set must be symmetric")
        self.generators = tuple(gens)
        self.lengths = self._bfs_lengths()
        self.labels = list(labels) if labels is not None else list(range(n))
        if n <= _EXHAUSTIVE_ORDER:
            self.check_axioms()

    def _bfs_lengths(self):
        dist = np.full(self.order, -1, dtype=np.int64)
        dist[self.identity] = 0
        frontier = [self.identity]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for x in frontier:
                for g in self.generators:
                    y = int(self.mult[x, g])
                    if dist[y] < 0:
                        dist[y] = d
                        nxt.append(y)
            frontier = nxt
        if (dist < 0).any():
            raise ValueError("generators do not generate the group")
        return dist

    def check_axioms(self):
        """Exhaustive associativity check (identity/inverses are checked at init)."""
        m = self.mult
        for a in range(self.order):
            if not np.array_equal(m[m[a], :], m[a][m]):
                raise ValueError("multiplication table is not associative")
        return True

    def word_length(self, g) -> int:
        return int(self.lengths[g])

    def left_regular_stack(self) -> np.ndarray:
        """All left-translation permutation matrices, shape (order, order, order)."""
        if self.order > _REGULAR_CAP:
            raise ValueError(
                f"regular representation capped at order {_REGULAR_CAP}")
        n = self.order
        lam = np.zeros((n, n, n))
        cols = np.arange(n)
        for g in range(n):
            lam[g, self.mult[g], cols] = 1.0
        return lam

    def __repr__(self):
        return f"FiniteGroupModel({self.name!r}, order={self.order})"


def cyclic_model(m: int) -> FiniteGroupModel:
    if m < 1:
        raise ValueError("order must be positive")
    idx = np.arange(m)
    mult = (idx[:, None] + idx[None, :]) % m
    gens = [] if m == 1 else sorted({1, m - 1})
    return FiniteGroupModel(f"Z/{m}", mult, gens)


def symmetric_model(n: int) -> FiniteGroupModel:
    """The symmetric group S_n generated by adjacent transpositions."""
    if n < 1:
        raise ValueError("n must be positive")
    elems = sorted(permutations(range(n)))
    index = {p: i for i, p in enumerate(elems)}
    mult = [[index[tuple(p[q[x]] for x in range(n))] for q in elems]
            for p in elems]
    gens = []
    for i in range(n - 1):
        t = list(range(n))
        t[i], t[i + 1] = t[i + 1], t[i]
        gens.append(index[tuple(t)])
    return FiniteGroupModel(f"S{n}", mult, gens, labels=elems)


def sl3_f2_model() -> FiniteGroupModel:
    """SL(3) over the two-element field (order 168), generated by the six
    elementary transvections, which are involutions in characteristic 2."""
    eye = np.eye(3, dtype=np.uint8)
    gens_mats = []
    for i in range(3):
        for j in range(3):
            if i != j:
                m = eye.copy()
                m[i, j] = 1
                gens_mats.append(m)
    elems = [eye]
    index = {eye.tobytes(): 0}
    frontier = [eye]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens_mats:
                p = (g @ m) % 2
                key = p.tobytes()
                if key not in index:
                    index[key] = len(elems)
                    elems.append(p)
                    nxt.append(p)
        frontier = nxt
    n = len(elems)
    mult = np.zeros((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(n):
            mult[a, b] = index[((elems[a] @ elems[b]) % 2).tobytes()]
    gen_idx = [index[g.tobytes()] for g in gens_mats]
    return FiniteGroupModel("SL3(F2)", mult, gen_idx, labels=elems)


class FiniteMeasure:
    """A (possibly signed) measure on a model, stored as a dense weight vector."""

    def __init__(self, model: FiniteGroupModel, weights):
        w = np.asarray(weights, dtype=float)
        if w.shape != (model.order,):
            raise ValueError("weight vector must match the group order")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        self.model = model
        self.weights = w

    @classmethod
    def point_mass(cls, model, g):
        w = np.zeros(model.order)
        w[g] = 1.0
        return cls(model, w)

    @classmethod
    def uniform(cls, model, elements=None):
        if elements is None:
            elements = range(model.order)
        elements = list(elements)
        w = np.zeros(model.order)
        w[elements] = 1.0 / len(elements)
        return cls(model, w)

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def is_probability(self) -> bool:
        return (self.weights.min() >= -1e-12
                and abs(self.mass - 1.0) <= 1e-12)

    @property
    def support(self):
        idx = np.nonzero(self.weights)[0]
        return [(int(i), float(self.weights[i])) for i in idx]

    @property
    def max_word_length(self) -> int:
        idx = np.nonzero(self.weights)[0]
        if idx.size == 0:
            return 0
        return int(self.model.lengths[idx].max())

    def __add__(self, other):
        self._same_model(other)
        return FiniteMeasure(self.model, self.weights + other.weights)

    def __sub__(self, other):
        self._same_model(other)
        return FiniteMeasure(self.model, self.weights - other.weights)

    def __mul__(self, scalar):
        return FiniteMeasure(self.model, self.weights * float(scalar))

    __rmul__ = __mul__

    def _same_model(self, other):
        if self.model is not other.model:
            raise ValueError("measures live on different groups")

    def __repr__(self):
        return (f"FiniteMeasure({self.model.name}, mass={self.mass:.6g}, "
                f"support={len(self.support)})")


def convolve(m1: FiniteMeasure, m2: FiniteMeasure) -> FiniteMeasure:
    """Pushforward of m1 (x) m2 under multiplication; masses multiply."""
    m1._same_model(m2)
    model = m1.model
    s1 = np.nonzero(m1.weights)[0]
    s2 = np.nonzero(m2.weights)[0]
    out = np.zeros(model.order)
    if s1.size and s2.size:
        np.add.at(out, model.mult[np.ix_(s1, s2)],
                  np.outer(m1.weights[s1], m2.weights[s2]))
    return FiniteMeasure(model, out)


def convolution_powers(mu: FiniteMeasure, n: int):
    """[mu, mu^2, ..., mu^n] under convolution."""
    if n < 1:
        raise ValueError("need n >= 1")
    out = [mu]
    for _ in range(n - 1):
        out.append(convolve(out[-1], mu))
    return out


def left_regular_matrix(m: FiniteMeasure) -> np.ndarray:
    """Matrix of the left regular representation applied to the measure.

    Entry (x, y) is m(x y^{-1}); convolution of measures goes to matrix
    product.
    """
    model = m.model
    return m.weights[model.mult[:, model.inverse]]


class TwoStepRep:
    """Two families pi0(g): X0 -> X1 and pi1(g): X1 -> X2, once-composable.

    The defining relation pi1(g g') pi0(g'') == pi1(g) pi0(g' g'') is
    equivalent to the two-variable form pi1(x) pi0(y) == pi(x y) with
    pi(z) := pi1(z) pi0(e), which needs only order^2 products; construction
    checks it exhaustively for orders <= 64 and on 10^4 random pairs beyond
    that, and verifies the growth certificate ||pi_i(g)|| <= L e^{s l(g)}.
    """

    def __init__(self, model, pi0, pi1, L, s, seed=5):
        pi0 = np.asarray(pi0)
        pi1 = np.asarray(pi1)
        n = model.order
        if pi0.ndim != 3 or pi1.ndim != 3 or pi0.shape[0] != n or pi1.shape[0] != n:
            raise ValueError("need one matrix per group element in each family")
        if pi1.shape[2] != pi0.shape[1]:
            raise ValueError("pi1 must consume the space pi0 produces")
        if not (L > 0 and s >= 0):
            raise ValueError("growth certificate needs L > 0 and s >= 0")
        self.model = model
        self._pi0 = pi0
        self._pi1 = pi1
        self.L = float(L)
        self.s = float(s)
        self.u_stack = None     # populated by sandwich_twostep
        self.A = None
        self.B = None
        self._pi = np.einsum("gij,jk->gik", pi1, pi0[model.identity])
        self._check_relation(seed)
        self._check_growth()

    @property
    def dims(self):
        return (self._pi0.shape[2], self._pi0.shape[1], self._pi1.shape[1])

    def pi0(self, g):
        return self._pi0[g]

    def pi1(self, g):
        return self._pi1[g]

    def pi(self, g):
        return self._pi[g]

    def pi_stack(self):
        return self._pi

    def _check_relation(self, seed):
        n = self.model.order
        mult = self.model.mult
        worst = 0.0
        if n <= _EXHAUSTIVE_ORDER:
            xs = range(n)
            for x in xs:
                lhs = np.einsum("ij,gjk->gik", self._pi1[x], self._pi0)
                rhs = self._pi[mult[x]]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        else:
            rng = np.random.default_rng(seed)
            xs = rng.integers(0, n, size=10000)
            ys = rng.integers(0, n, size=10000)
            for x, y in zip(xs, ys):
                lhs = self._pi1[x] @ self._pi0[y]
                rhs = self._pi[mult[x, y]]
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        if worst > _RELATION_TOL:
            raise ValueError(
                f"once-composable relation fails (residual {worst:.3e})")

    def _check_growth(self):
        for g in range(self.model.order):
            cap = self.L * math.exp(self.s * self.model.lengths[g]) + 1e-9
            if _opnorm(self._pi0[g]) > cap or _opnorm(self._pi1[g]) > cap:
                raise ValueError(
                    f"growth certificate (L={self.L}, s={self.s}) violated at "
                    f"element {g}")


def apply_measure(rep, m: FiniteMeasure) -> np.ndarray:
    """pi(m) = sum_g m(g) pi(g); linear, and pi(m1 * m2) = pi1(m1) pi0(m2)."""
    if isinstance(rep, TwoStepRep):
        if rep.model is not m.model:
            raise ValueError("representation and measure live on different groups")
        return np.tensordot(m.weights, rep.pi_stack(), axes=1)
    stack = np.asarray(rep)
    if stack.ndim != 3 or stack.shape[0] != m.model.order:
        raise ValueError("need one matrix per group element")
    return np.tensordot(m.weights, stack, axes=1)


def sandwich_twostep(model, u_stack, A, B, weights=None, rate=0.0) -> TwoStepRep:
    """Canonical two-step family pi0(g) = u(g) A, pi1(g) = B u(g).

    `u_stack` must be a unitary representation (one matrix per element,
    identity at the identity); the once-composable relation then holds
    identically.  Optional `weights` rescale the columns of A (a diagonal
    reweighting of X0).  The growth certificate is measured directly:
    s = rate and L = max_g max_i ||pi_i(g)|| e^{-rate l(g)}; with the default
    rate this is just max(||A||, ||B||).
    """
    u = np.asarray(u_stack, dtype=float)
    n = model.order
    if u.ndim != 3 or u.shape[0] != n or u.shape[1] != u.shape[2]:
        raise ValueError("u_stack must hold one square matrix per element")
    d = u.shape[1]
    eye = np.eye(d)
    if np.max(np.abs(u[model.identity] - eye)) > 1e-12:
        raise ValueError("u must send the identity to the identity matrix")
    for g in range(n):
        if np.max(np.abs(u[g] @ u[g].T - eye)) > 1e-10:
            raise ValueError(f"u({g}) is not orthogonal/unitary")
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim != 2 or A.shape[0] != d:
        raise ValueError("A must map X0 into the representation space")
    if B.ndim != 2 or B.shape[1] != d:
        raise ValueError("B must map the representation space into X2")
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (A.shape[1],) or np.any(w <= 0):
            raise ValueError("weights must be positive, one per X0 coordinate")
        A = A * w[None, :]
    pi0 = np.einsum("gij,jk->gik", u, A)
    pi1 = np.einsum("ij,gjk->gik", B, u)
    scale = np.exp(-float(rate) * model.lengths.astype(float))
    L = max(max(_opnorm(pi0[g]), _opnorm(pi1[g])) * scale[g] for g in range(n))
    rep = TwoStepRep(model, pi0, pi1, L, rate)
    rep.u_stack, rep.A, rep.B = u, A, B
    return rep


def sandwich_limit(rep: TwoStepRep) -> np.ndarray:
    """B (group average of u) A: the predicted limit of pi(mu^n) for a
    generating probability measure mu on a model with a spectral gap."""
    if rep.u_stack is None:
        raise ValueError("limit prediction needs a sandwich-built representation")
    return rep.B @ rep.u_stack.mean(axis=0) @ rep.A


class _FitResult(NamedTuple):
    C: float
    t: float
    window: tuple


def _log_linear_fit(ns, values, floor=_NOISE_FLOOR) -> Optional[_FitResult]:
    """Fit values ~ C e^{-t n} by least squares on the log scale.

    The window is the largest suffix of the above-floor region: entries at
    or below `floor` are numerical noise and are discarded, then the fit
    runs over the trailing contiguous run of what remains.
    """
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    mask = vals > floor
    if not mask.any():
        return None
    last = int(np.nonzero(mask)[0][-1])
    start = last
    while start > 0 and mask[start - 1]:
        start -= 1
    window = slice(start, last + 1)
    if last - start + 1 < 2:
        return None
    slope, intercept = np.polyfit(ns[window], np.log(vals[window]), 1)
    return _FitResult(float(math.exp(intercept)), float(-slope),
                      tuple(range(start, last + 1)))


class GapProfile:
    """Sequence ||lambda(mu^n) - P|| plus generation flag and fitted ratio."""

    def __init__(self, values, generating, rho, note=""):
        self.values = tuple(float(v) for v in values)
        self.generating = bool(generating)
        self.rho = rho
        self.note = note

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)


def spectral_gap_profile(model, mu: FiniteMeasure, horizon: int) -> GapProfile:
    """||lambda(mu^n) - P|| for n = 1..horizon on the regular representation.

    P averages onto constants; since lambda(mu) fixes constants, the n-th
    value is the operator norm of (lambda(mu) - P)^n and the sequence is
    nonincreasing.  A non-generating support is reported in the profile
    rather than raised: the sequence may stall at a positive value.
    """
    if mu.model is not model:
        raise ValueError("measure lives on a different group")
    if not mu.is_probability:
        raise ValueError("need a probability measure")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    support = [i for i, _ in mu.support]
    reached = {model.identity}
    frontier = [model.identity]
    while frontier:
        nxt = []
        for x in frontier:
            for g in support:
                y = int(model.mult[x, g])
                if y not in reached:
                    reached.add(y)
                    nxt.append(y)
        frontier = nxt
    generating = len(reached) == model.order
    n = model.order
    T = left_regular_matrix(mu) - np.full((n, n), 1.0 / n)
    vals = []
    M = np.eye(n)
    for _ in range(horizon):
        M = M @ T
        vals.append(_opnorm(M))
    for a, b in zip(vals, vals[1:]):
        if b > a + 1e-12:
            raise AssertionError("internal error: profile must be nonincreasing")
    fit = _log_linear_fit(np.arange(1, horizon + 1), vals)
    rho = math.exp(-fit.t) if fit is not None else None
    note = "" if generating else (
        "support does not generate; the profile may stall at a positive value")
    return GapProfile(vals, generating, rho, note)


@dataclass
class StarReport:
    cauchy_diffs: tuple
    p_estimate: np.ndarray
    invariance_residuals: tuple
    fitted_C: Optional[float]
    fitted_t: Optional[float]
    passed: bool
    notes: str

    def to_json(self) -> dict:
        return {
            "cauchyDiffs": list(self.cauchy_diffs),
            "invarianceResiduals": list(self.invariance_residuals),
            "fittedC": self.fitted_C,
            "fittedT": self.fitted_t,
            "pass": self.passed,
            "notes": self.notes,
        }


def verify_star_instance(rep: TwoStepRep, measures, grid, start_n=1) -> StarReport:
    """Cauchy differences, invariance residuals, and the exponential fit.

    `measures` is m_n for n = start_n, start_n+1, ...; each m_n must be
    supported in the word-ball of radius n.  The fit template is
    ||pi(m_n) - pi(m_{n+1})|| <= C L^2 e^{-t n}, solved by log-linear least
    squares over the noise-trimmed window; a failed fit is reported in the
    result, never raised.  Residuals are max over the (g, g') grid of
    ||pi(delta_g m_n delta_g') - pi(m_n)||.
    """
    model = rep.model
    for i, m in enumerate(measures):
        if m.model is not model:
            raise ValueError("measures must live on the representation's group")
        if m.max_word_length > start_n + i:
            raise ValueError(
                f"measure at n={start_n + i} is supported outside the "
                f"word-ball of radius {start_n + i}")
    mats = [apply_measure(rep, m) for m in measures]
    cauchy = tuple(_opnorm(a - b) for a, b in zip(mats, mats[1:]))
    residuals = []
    for mat, m in zip(mats, measures):
        worst = 0.0
        for g, gp in grid:
            shifted = convolve(convolve(FiniteMeasure.point_mass(model, g), m),
                               FiniteMeasure.point_mass(model, gp))
            worst = max(worst, _opnorm(apply_measure(rep, shifted) - mat))
        residuals.append(worst)
    ns = np.arange(start_n, start_n + len(cauchy))
    fit = _log_linear_fit(ns, cauchy)
    if fit is None:
        return StarReport(cauchy, mats[-1], tuple(residuals), None, None,
                          False, "no usable decay window in the differences")
    c_fit = fit.C / rep.L ** 2
    if fit.t <= 0 or c_fit <= 0:
        return StarReport(cauchy, mats[-1], tuple(residuals), c_fit, fit.t,
                          False, "differences do not decay")
    note = (f"fit over n={fit.window[0] + start_n}..{fit.window[-1] + start_n} "
            f"({len(fit.window)} points)")
    return StarReport(cauchy, mats[-1], tuple(residuals), c_fit, fit.t,
                      True, note)


class LocalEstimate(NamedTuple):
    lhs: float
    rhs: float
    passed: bool


def local_estimate_check(rep: TwoStepRep, mu, mu_prime, g1, g2) -> LocalEstimate:
    """Compare ||pi(delta_g1 (mu - mu') delta_g2)|| with its regular bound.

    The right-hand side L^2 e^{s(l(g1)+l(g2))} ||lambda(mu - mu')|| dominates
    for every representation with growth certificate (L, s): this is a
    theorem, so a failure indicates an implementation bug.
    """
    for m in (mu, mu_prime):
        if not m.is_probability:
            raise ValueError("need probability measures")
    model = rep.model
    diff = mu - mu_prime
    moved = convolve(convolve(FiniteMeasure.point_mass(model, g1), diff),
                     FiniteMeasure.point_mass(model, g2))
    lhs = _opnorm(apply_measure(rep, moved))
    rhs = (rep.L ** 2
           * math.exp(rep.s * (model.lengths[g1] + model.lengths[g2]))
           * _opnorm(left_regular_matrix(diff)))
    return LocalEstimate(lhs, rhs, lhs <= rhs + 1e-10)


def cusp_measure_bound(omega1_mass: float, gap_profile) -> np.ndarray:
    """Lower bounds on the mass of the n+1-st domain from a gap profile.

    The deficit obeys 1 - |Omega_{n+1}| <= eps_n / |Omega_1|; the returned
    sequence is 1 - eps_n/mass clamped to [0, 1].
    """
    if not 0 < omega1_mass <= 1:
        raise ValueError("omega1 mass must lie in (0, 1]")
    eps = np.asarray(list(gap_profile), dtype=float)
    return np.clip(1.0 - eps / omega1_mass, 0.0, 1.0)
