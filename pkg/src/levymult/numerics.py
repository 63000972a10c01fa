"""Special functions, sphere quadrature, orthant maximization and finite differences.

Everything here is a pure function of its inputs. Point-wise callables follow
the numpy convention used throughout the package: they take an array of shape
``(..., n)`` and return an array of shape ``(...)``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_jacobi

__all__ = [
    "MultiIndex",
    "QuadratureRule",
    "finite_difference_partial",
    "gamma_ratio",
    "kink_quadrature",
    "log_gamma",
    "maximize_on_sphere_orthant",
    "orient_nodes",
    "orthant_point",
    "sphere_quadrature",
    "surface_area",
]

SUPPORTED_DIMENSIONS = (2, 3, 4)
EST_ERROR_FLOOR = 1e-14


def log_gamma(x: float) -> float:
    """ln Γ(x) for x > 0."""
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ValueError(f"log_gamma requires a finite x > 0, got {x!r}")
    return math.lgamma(x)


def gamma_ratio(r: float, n: int) -> float:
    """Γ((r+n)/2) / Γ((r+1)/2), the r-dependent factor of the rotation bound."""
    if not r > 0:
        raise ValueError(f"gamma_ratio requires r > 0, got {r!r}")
    if n < 2:
        raise ValueError(f"gamma_ratio requires n >= 2, got {n!r}")
    return math.exp(log_gamma((r + n) / 2) - log_gamma((r + 1) / 2))


def surface_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class MultiIndex:
    """Multi-index β = (β_1, ..., β_n) of a partial derivative ∂^β.

    ``from_indices`` takes the 1-based coordinate labels i_1..i_k used in
    the mathematical notation ∂_{i_1}...∂_{i_k}.
    """

    beta: tuple[int, ...]

    def __post_init__(self):
        beta = tuple(int(b) for b in self.beta)
        if any(b < 0 for b in beta):
            raise ValueError(f"negative entry in multi-index {beta}")
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_indices(cls, indices: Sequence[int], n: int) -> "MultiIndex":
        if len(indices) == 0:
            raise ValueError("at least one coordinate index is required")
        beta = [0] * n
        for i in indices:
            if not 1 <= i <= n:
                raise ValueError(f"index {i} outside 1..{n}")
            beta[i - 1] += 1
        return cls(tuple(beta))

    @property
    def n(self) -> int:
        return len(self.beta)

    @property
    def order(self) -> int:
        return sum(self.beta)

    @property
    def indices(self) -> tuple[int, ...]:
        """1-based coordinate labels, repeated according to multiplicity."""
        return tuple(i + 1 for i, b in enumerate(self.beta) for _ in range(b))

    @property
    def distinct(self) -> bool:
        return all(b <= 1 for b in self.beta)


def _as_multi_index(beta, n: int) -> MultiIndex:
    if isinstance(beta, MultiIndex):
        if beta.n != n:
            raise ValueError(f"multi-index dimension {beta.n} != {n}")
        return beta
    beta = tuple(beta)
    if len(beta) != n:
        raise ValueError(f"multi-index {beta} does not have {n} entries")
    return MultiIndex(beta)


# ---------------------------------------------------------------------------
# quadrature on S^{n-1}


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on the unit sphere S^{n-1}.

    ``axis``/``kink`` describe rules adapted to integrands with a factor
    |θ·axis|^kink; for those the rule is accurate on that factor times a
    smooth function, and the total weight only approximates ω_{n-1}.
    """

    n: int
    nodes: NDArray[np.float64]
    weights: NDArray[np.float64]
    level: int
    est_error: float
    axis: NDArray[np.float64] | None = None
    kink: float = 0.0
    family: str = field(default="product")

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != self.n or weights.shape != (nodes.shape[0],):
            raise ValueError("nodes must be (K, n) and weights (K,)")
        if np.any(np.abs(np.linalg.norm(nodes, axis=1) - 1.0) > 1e-12):
            raise ValueError("quadrature nodes must be unit vectors")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, g: Callable[[NDArray], NDArray]) -> complex | float:
        """Σ_j w_j g(θ_j) for a callable vectorized over the node array."""
        return np.asarray(g(self.nodes)) @ self.weights


def _circle_rule(level: int) -> tuple[NDArray, NDArray]:
    m = 2 ** level
    t = 2 * np.pi * np.arange(m) / m
    return np.column_stack([np.cos(t), np.sin(t)]), np.full(m, 2 * np.pi / m)


def _product_rule(n: int, level: int) -> tuple[NDArray, NDArray]:
    if n == 2:
        return _circle_rule(level)
    if n == 3:
        x, w = np.polynomial.legendre.leggauss(level)
        m = 2 * level
        phi = 2 * np.pi * np.arange(m) / m
        st = np.sqrt(1.0 - x ** 2)
        nodes = np.column_stack([
            np.outer(st, np.cos(phi)).ravel(),
            np.outer(st, np.sin(phi)).ravel(),
            np.repeat(x, m),
        ])
        return nodes, np.repeat(w, m) * (2 * np.pi / m)
    if n == 4:
        # θ = (cos ψ, sin ψ · ω), dσ = sin²ψ dψ dσ_2(ω)
        x, w = np.polynomial.legendre.leggauss(level)
        psi = (x + 1) * np.pi / 2
        wpsi = w * np.pi / 2 * np.sin(psi) ** 2
        om, wom = _product_rule(3, level)
        nodes = np.concatenate([
            np.column_stack([np.full(len(om), np.cos(p)), np.sin(p) * om]) for p in psi
        ])
        return nodes, np.outer(wpsi, wom).ravel()
    raise ValueError(f"unsupported dimension n={n}; supported: {SUPPORTED_DIMENSIONS}")


def _renormalize(nodes: NDArray) -> NDArray:
    return nodes / np.linalg.norm(nodes, axis=1, keepdims=True)


def sphere_quadrature(n: int, level: int) -> QuadratureRule:
    """Fixed product rule on S^{n-1}.

    n=2: 2**level equispaced nodes (trapezoid). n=3: ``level`` Gauss-Legendre
    nodes in cos(polar angle) times 2*level equispaced azimuths. n=4:
    Gauss-Legendre in the first hyperspherical angle times the n=3 rule.

    ``est_error`` is the relative change of ∫|θ_1|^{5/2} dσ between this
    level and the next finer rule (level+1 and, for n >= 3, 2*level).
    """
    if n not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension n={n}; supported: {SUPPORTED_DIMENSIONS}")
    if level < 4:
        raise ValueError(f"level must be >= 4, got {level}")
    nodes, weights = _product_rule(n, level)
    nodes = _renormalize(nodes)

    def probe(lv):
        nd, w = _product_rule(n, lv)
        return np.abs(nd[:, 0]) ** 2.5 @ w

    base = probe(level)
    finer = [level + 1] if n == 2 else [level + 1, 2 * level]
    est = max(abs(base - probe(lv)) / abs(probe(lv)) for lv in finer)
    return QuadratureRule(n, nodes, weights, level, max(est, EST_ERROR_FLOOR), family="product")


def _kink_rule_canonical(n: int, level: int, kink: float) -> tuple[NDArray, NDArray]:
    # θ = (cos s, sin s · ω); the kernel |cos s|^kink vanishes at s = π/2.
    # Gauss-Jacobi in u = π/2 - s with weight u^kink on each hemisphere.
    npolar = level + int(math.ceil(math.sqrt(kink)))
    x, w = roots_jacobi(npolar, 0.0, kink)
    u = (x + 1) * (np.pi / 4)
    w = w * (np.pi / 4) ** (kink + 1)
    s = np.pi / 2 - u
    # surface weight = GJ weight / u^kink (the kernel is supplied by the integrand)
    wsurf = w * u ** (-kink) * np.sin(s) ** (n - 2)
    s = np.concatenate([s, np.pi - s])
    wsurf = np.concatenate([wsurf, wsurf])
    if n == 2:
        om, wom = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    elif n == 3:
        m = max(8, 2 * level)
        t = 2 * np.pi * np.arange(m) / m
        om, wom = np.column_stack([np.cos(t), np.sin(t)]), np.full(m, 2 * np.pi / m)
    elif n == 4:
        om, wom = _product_rule(3, max(4, level))
    else:
        raise ValueError(f"unsupported dimension n={n}; supported: {SUPPORTED_DIMENSIONS}")
    nodes = np.concatenate([
        np.column_stack([np.full(len(om), np.cos(si)), np.sin(si) * om]) for si in s
    ])
    return _renormalize(nodes), np.outer(wsurf, wom).ravel()


def _householder_to(direction: NDArray) -> NDArray:
    """Orthogonal matrix Q with Q e_1 = direction.

    A plain reflection along e_1 - d cancels catastrophically when d is close
    to e_1, so for d_1 > 0 the reflection along e_1 + d (sending e_1 to -d) is
    negated instead.
    """
    n = direction.shape[-1]
    e1 = np.zeros(n)
    e1[0] = 1.0
    flip = direction[0] > 0
    v = e1 + direction if flip else e1 - direction
    H = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    return -H if flip else H


def kink_quadrature(n: int, level: int, kink: float, axis: Sequence[float] | None = None) -> QuadratureRule:
    """Rule on S^{n-1} adapted to integrands |θ·axis|^kink · g(θ) with g smooth.

    The polar angle about ``axis`` uses Gauss-Jacobi nodes with the kink
    exponent as Jacobi parameter on each hemisphere, so the non-smooth factor
    along the great circle θ·axis = 0 is integrated exactly; the remaining
    coordinates use the fixed product rule of one dimension lower.
    """
    if n not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"unsupported dimension n={n}; supported: {SUPPORTED_DIMENSIONS}")
    if level < 4:
        raise ValueError(f"level must be >= 4, got {level}")
    if kink < 0:
        raise ValueError(f"kink exponent must be >= 0, got {kink}")
    if axis is None:
        ax = np.zeros(n)
        ax[0] = 1.0
    else:
        ax = np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
    nodes, weights = _kink_rule_canonical(n, level, kink)
    nodes = _renormalize(nodes @ _householder_to(ax).T)

    probe_dir = _renormalize(np.array([[0.3, -0.5, 0.7, 0.4][:n]]))[0]

    def probe(lv):
        nd, w = _kink_rule_canonical(n, lv, kink)
        return (np.abs(nd[:, 0]) ** kink * np.exp(nd @ probe_dir)) @ w

    base, fine = probe(level), probe(2 * level)
    est = max(abs(base - fine) / abs(fine), EST_ERROR_FLOOR)
    return QuadratureRule(n, nodes, weights, level, est, axis=ax, kink=float(kink), family="kink")


def orient_nodes(rule: QuadratureRule, directions: NDArray) -> NDArray:
    """Nodes of an e_1-aligned rule carried onto each of ``directions``.

    Returns an array of shape (N, K, n): for every unit direction d the rule's
    nodes mapped by the orthogonal map of :func:`_householder_to` for d.
    """
    d = np.asarray(directions, dtype=float)
    e1 = np.zeros(d.shape[-1])
    e1[0] = 1.0
    flip = d[:, 0] > 0
    v = np.where(flip[:, None], e1[None, :] + d, e1[None, :] - d)
    scale = 2.0 / np.einsum("ij,ij->i", v, v)
    proj = v @ rule.nodes.T                                   # (N, K)
    out = rule.nodes[None, :, :] - (scale[:, None] * proj)[:, :, None] * v[:, None, :]
    out[flip] *= -1.0
    return out


# ---------------------------------------------------------------------------
# maximization over the positive orthant of the sphere


def orthant_point(angles: NDArray) -> NDArray:
    """Hyperspherical map [0, π/2]^{n-1} -> positive orthant of S^{n-1}."""
    a = np.asarray(angles, dtype=float)
    m = a.shape[-1]
    out = np.empty(a.shape[:-1] + (m + 1,))
    sin_prod = np.ones(a.shape[:-1])
    for i in range(m):
        out[..., i] = sin_prod * np.cos(a[..., i])
        sin_prod = sin_prod * np.sin(a[..., i])
    out[..., m] = sin_prod
    return out


def maximize_on_sphere_orthant(
    f: Callable[[NDArray], NDArray],
    n: int,
    level: int,
    *,
    margin: float = 0.0,
    tol: float = 1e-6,
) -> tuple[NDArray, float]:
    """Grid search over the closed positive orthant of S^{n-1}, then refinement.

    The orthant is parametrized by n-1 angles in [margin, π/2 - margin] and
    sampled on a (level+1)^{n-1} grid. The best grid point (first in
    lexicographic order on ties) is refined by a compass search whose cell is
    halved until its angular diameter drops below ``tol``.

    Parameters
    ----------
    f
        Vectorized objective: (..., n) unit vectors -> (...) reals.
    n, level
        Dimension and grid resolution.
    margin
        Keeps probe points off the coordinate hyperplanes.

    Returns
    -------
    point, value
        The value is attained at ``point``, so it is a lower bound for the
        true maximum.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if level < 1:
        raise ValueError("level must be >= 1")
    lo, hi = margin, np.pi / 2 - margin
    m = n - 1

    def evaluate(angles):
        vals = np.asarray(f(orthant_point(angles)), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = orthant_point(angles)[~np.isfinite(vals)][0]
            raise ValueError(f"objective is not finite at probe point {bad.tolist()}")
        return vals

    axis = np.linspace(lo, hi, level + 1)
    grid = np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m)
    vals = evaluate(grid)
    best = int(np.argmax(vals))
    a, value = grid[best].copy(), float(vals[best])

    h = (hi - lo) / level
    offsets = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=m)))
    offsets = offsets[np.any(offsets != 0, axis=1)]
    while 2 * h * math.sqrt(m) >= tol:
        for _ in range(64):
            cand = np.clip(a[None, :] + h * offsets, lo, hi)
            cv = evaluate(cand)
            j = int(np.argmax(cv))
            if cv[j] > value:
                a, value = cand[j], float(cv[j])
            else:
                break
        h /= 2
    return orthant_point(a), value


# ---------------------------------------------------------------------------
# finite differences

_STENCILS = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}
_DEFAULT_REL_STEP = {1: 1e-3, 2: 3e-3, 3: 6e-3, 4: 1e-2}


def default_step(order: int) -> float:
    """Relative step used when no explicit step is given."""
    return _DEFAULT_REL_STEP.get(order, 1e-2)


def _central_difference(f, xi: NDArray, beta: tuple[int, ...], h: NDArray):
    axes = [i for i, b in enumerate(beta) if b > 0]
    stencils = [_STENCILS[beta[i]] for i in axes]
    points, coeffs = [], []
    for combo in itertools.product(*stencils):
        p = xi.copy()
        c = 1.0
        for i, (off, w) in zip(axes, combo):
            p[..., i] = p[..., i] + off * h[..., i]
            c = c * w
        points.append(p)
        coeffs.append(c)
    vals = np.asarray(f(np.stack(points, axis=0)))
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite function value inside the difference stencil")
    scale = np.prod([h[..., i] ** beta[i] for i in axes], axis=0)
    return np.tensordot(np.asarray(coeffs), vals, axes=(0, 0)) / scale


def finite_difference_partial(
    f: Callable[[NDArray], NDArray],
    xi: NDArray,
    beta,
    h: float | NDArray | None = None,
):
    """∂^β f(ξ) by tensor central differences plus one Richardson step.

    The central stencils have O(h²) error; combining steps h and h/2 as
    (4 D(h/2) - D(h)) / 3 leaves O(h⁴).

    Parameters
    ----------
    f
        Vectorized callable (..., n) -> (...).
    xi
        Point of shape (n,) or a batch of points (N, n).
    beta
        ``MultiIndex`` or sequence of n non-negative counts, |β| <= 4.
    h
        Scalar or per-axis step (broadcastable to ``xi``). Defaults to a
        relative step ``default_step(|β|) * |ξ|``.
    """
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    mi = _as_multi_index(beta, n)
    if mi.order > 4 or max(mi.beta) > 4:
        raise ValueError(f"derivative order {mi.order} exceeds the supported 4")
    if mi.order == 0:
        return np.asarray(f(xi))
    if h is None:
        h = default_step(mi.order) * np.linalg.norm(xi, axis=-1, keepdims=True)
    h = np.broadcast_to(np.asarray(h, dtype=float), xi.shape).copy()
    if np.any(h <= 0):
        raise ValueError("finite-difference step must be positive")
    coarse = _central_difference(f, xi, mi.beta, h)
    fine = _central_difference(f, xi, mi.beta, h / 2)
    return (4.0 * fine - coarse) / 3.0
