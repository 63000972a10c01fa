"""Multiplier symbols: angular modulators, radial profiles and the symbol families.

All ratio-type symbols are computed as

    m(ξ) = Σ_j w_j K(ξ·θ_j) φ(θ_j) / Σ_j w_j K(ξ·θ_j)

with a sphere rule whose polar axis is aligned with ξ (see
:func:`levymult.numerics.kink_quadrature`). Because numerator and denominator
share positive weights and a sign-definite kernel, |m| ≤ ‖φ‖_∞ holds exactly
for every discretization.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .numerics import (
    QuadratureRule,
    kink_quadrature,
    log_gamma,
    orient_nodes,
    sphere_quadrature,
)

__all__ = [
    "AngularModulator",
    "Beurling",
    "Constant",
    "DEFAULT_LEVEL",
    "Directional",
    "GeneralL",
    "LevyGauss",
    "Mixed",
    "RadialProfile",
    "RieszPower",
    "Stable",
    "Symbol",
    "beurling_symbol",
    "eval_general_symbol",
    "eval_levy_gauss_symbol",
    "eval_mixed_symbol",
    "eval_stable_symbol",
    "normalization_constant",
    "radial_profile_from_density",
    "relativistic_density",
    "relativistic_exponent",
    "relativistic_profile",
    "riesz_power_symbol",
    "second_moment_matrices",
    "stable_profile",
    "symbol_from_json",
    "symbol_to_json",
]

DEFAULT_LEVEL = {2: 12, 3: 48, 4: 12}
MODULUS_SLACK = 1e-12
_CHUNK = 1 << 21


def normalization_constant(n: int, r: float) -> float:
    """A_{n,r} with ∫_{S^{n-1}} |ξ·θ|^r dσ(θ) = A_{n,r} |ξ|^r."""
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported dimension n={n}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    return 2 * math.pi ** ((n - 1) / 2) * math.exp(log_gamma((1 + r) / 2) - log_gamma((n + r) / 2))


# ---------------------------------------------------------------------------
# angular modulators


@dataclass(frozen=True, eq=False)
class AngularModulator:
    """A bounded function φ on S^{n-1} (‖φ‖_∞ ≤ 1 is enforced).

    Build instances with the ``constant``, ``harmonic``, ``tabulated`` and
    ``expression`` constructors rather than directly.
    """

    kind: str
    n: int
    value: complex = 1.0
    sign: int = -1
    rule: QuadratureRule | None = None
    table: NDArray[np.complex128] | None = None
    func: Callable[[NDArray], NDArray] | None = None

    @classmethod
    def constant(cls, c: complex = 1.0, n: int = 2) -> "AngularModulator":
        c = complex(c)
        if abs(c) > 1 + MODULUS_SLACK:
            raise ValueError(f"constant modulator |c| = {abs(c)} exceeds 1")
        return cls("constant", n, value=c)

    @classmethod
    def harmonic(cls, sign: int = -1) -> "AngularModulator":
        """θ ↦ e^{2i·sign·arg θ} on the circle.

        The default sign -1 makes the stable symbol a positive multiple of the
        Beurling symbol ξ̄/ξ.
        """
        if sign not in (1, -1):
            raise ValueError("harmonic sign must be +1 or -1")
        return cls("harmonic", 2, sign=sign)

    @classmethod
    def tabulated(cls, rule: QuadratureRule, values: Sequence[complex]) -> "AngularModulator":
        vals = np.asarray(values, dtype=complex).ravel()
        if vals.shape != (len(rule),):
            raise ValueError(f"expected {len(rule)} tabulated values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("tabulated modulator values must be finite")
        if np.max(np.abs(vals), initial=0.0) > 1 + MODULUS_SLACK:
            raise ValueError("tabulated modulator exceeds 1 in modulus")
        vals.flags.writeable = False
        return cls("tabulated", rule.n, rule=rule, table=vals)

    @classmethod
    def expression(cls, func: Callable[[NDArray], NDArray], n: int, check_level: int = 12) -> "AngularModulator":
        """Wrap a vectorized callable; its bound is checked on a sample rule."""
        probe = sphere_quadrature(n, check_level).nodes
        vals = np.asarray(func(probe), dtype=complex)
        if vals.shape != (len(probe),) or not np.all(np.isfinite(vals)):
            raise ValueError("expression modulator must return finite values, one per node")
        if np.max(np.abs(vals)) > 1 + MODULUS_SLACK:
            raise ValueError(f"expression modulator reaches modulus {np.max(np.abs(vals)):.6g} > 1")
        return cls("expression", n, func=func)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @cached_property
    def _tree(self):
        return cKDTree(self.rule.nodes)

    def __call__(self, theta: NDArray) -> NDArray[np.complex128]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[-1] != self.n and self.kind != "constant":
            raise ValueError(f"modulator expects {self.n}-vectors")
        if self.kind == "constant":
            return np.full(theta.shape[:-1], self.value, dtype=complex)
        if self.kind == "harmonic":
            z = theta[..., 0] + 1j * theta[..., 1]
            u = z / np.maximum(np.abs(z), 1e-300)
            return u * u if self.sign > 0 else np.conj(u * u)
        if self.kind == "tabulated":
            _, idx = self._tree.query(theta.reshape(-1, self.n))
            return self.table[idx].reshape(theta.shape[:-1])
        return np.asarray(self.func(theta), dtype=complex)

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": [self.value.real, self.value.imag]}
        if self.kind == "harmonic":
            return {"kind": "harmonic", "sign": self.sign}
        if self.kind == "tabulated":
            return {
                "kind": "tabulated",
                "level": self.rule.level,
                "values": [[v.real, v.imag] for v in self.table],
            }
        raise ValueError("expression modulators cannot be serialized")

    @classmethod
    def from_json(cls, doc: dict, n: int) -> "AngularModulator":
        kind = doc.get("kind")
        if kind == "constant":
            re, im = doc.get("value", [1.0, 0.0])
            return cls.constant(complex(re, im), n)
        if kind == "harmonic":
            if n != 2:
                raise ValueError("harmonic modulator requires n = 2")
            return cls.harmonic(int(doc.get("sign", -1)))
        if kind == "tabulated":
            rule = sphere_quadrature(n, int(doc["level"]))
            return cls.tabulated(rule, [complex(a, b) for a, b in doc["values"]])
        raise ValueError(f"unknown modulator kind {kind!r}")


# ---------------------------------------------------------------------------
# radial profiles L(x) = ∫_0^∞ (cos(rx) - 1) v(r) dr


def _gauss_legendre(order: int):
    return np.polynomial.legendre.leggauss(order)


class RadialProfile:
    """Even radial profile L with derivative L′.

    ``kink`` is the exponent of the non-smooth factor |x|^kink at the origin
    (the sphere rule is adapted to it); it is 0 for profiles that are smooth
    at x = 0.
    """

    def __init__(
        self,
        value: Callable[[NDArray], NDArray],
        derivative: Callable[[NDArray], NDArray] | None,
        source: str,
        kink: float = 0.0,
        params: dict | None = None,
        tail_bound: float = 0.0,
    ):
        self._value = value
        self._derivative = derivative
        self.source = source
        self.kink = float(kink)
        self.params = dict(params or {})
        self.tail_bound = float(tail_bound)

    def __call__(self, x) -> NDArray:
        return self._value(np.abs(np.asarray(x, dtype=float)))

    def derivative(self, x) -> NDArray:
        if self._derivative is None:
            raise ValueError(f"profile {self.source!r} has no derivative rule")
        x = np.asarray(x, dtype=float)
        return np.sign(x) * self._derivative(np.abs(x))

    def to_json(self) -> dict:
        if self.source in ("stable", "relativistic", "zero"):
            return {"kind": self.source, **self.params}
        raise ValueError(f"profile {self.source!r} cannot be serialized")

    @classmethod
    def from_json(cls, doc: dict) -> "RadialProfile":
        kind = doc.get("kind")
        if kind == "stable":
            return stable_profile(float(doc["r"]), float(doc.get("scale", -1.0)))
        if kind == "relativistic":
            return relativistic_profile(float(doc["alpha"]), int(doc["n"]))
        if kind == "zero":
            return radial_profile_from_density(lambda r: np.zeros_like(r))
        raise ValueError(f"unknown profile kind {kind!r}")


def stable_profile(r: float, scale: float = -1.0) -> RadialProfile:
    """L(x) = scale·|x|^r (the stable case; scale < 0 matches the Lévy sign)."""
    if not r > 0:
        raise ValueError("r must be positive")
    if scale == 0:
        raise ValueError("scale must be nonzero")

    def derivative(x):
        with np.errstate(divide="ignore"):
            return scale * r * np.power(x, r - 1)

    return RadialProfile(
        lambda x: scale * x ** r,
        derivative,
        "stable",
        kink=r,
        params={"r": r, "scale": scale},
    )


def relativistic_density(alpha: float, n: int) -> Callable[[NDArray], NDArray]:
    """Synthetic density v(r) = r^{-1-α}·min{1, e^{-r} r^{(n+α-1)/2}}.

    It obeys the exponential envelope of the relativistic stable density but
    is not that density itself.
    """
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    p = (n + alpha - 1) / 2

    def v(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            env = np.minimum(1.0, np.exp(-r + p * np.log(r)))
            out = r ** (-1 - alpha) * env
        return np.where(r > 0, out, 0.0)

    return v


class _DensityIntegrals:
    """Quadrature engine for L and L′ given a density on (0, ∞)."""

    def __init__(self, v, cutoff: float, order: int, first_panel: float = 1e-6, ratio: float = 1.5):
        self.v = v
        self.cutoff = cutoff
        self.order = order
        edges = [0.0, first_panel]
        while edges[-1] * ratio < cutoff:
            edges.append(edges[-1] * ratio)
        edges.append(cutoff)
        self.edges = np.array(edges)
        self.gl_x, self.gl_w = _gauss_legendre(order)

    def _panels(self, hi: float, x: float):
        edges = self.edges[self.edges < hi]
        edges = np.append(edges, hi)
        nodes, weights = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            pieces = max(1, int(math.ceil((b - a) * x / math.pi)))
            cuts = np.linspace(a, b, pieces + 1)
            half = np.diff(cuts) / 2
            mid = (cuts[:-1] + cuts[1:]) / 2
            nodes.append((mid[:, None] + half[:, None] * self.gl_x[None, :]).ravel())
            weights.append((half[:, None] * self.gl_w[None, :]).ravel())
        return np.concatenate(nodes), np.concatenate(weights)

    def _quad(self, f, a, b, **kw):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            return integrate.quad(f, a, b, limit=400, **kw)[0]

    def value(self, x: float) -> float:
        x = abs(float(x))
        if x == 0:
            return 0.0
        split = min(self.cutoff, 16 * math.pi / x)
        r, w = self._panels(split, x)
        total = float(np.sum(w * (np.cos(r * x) - 1.0) * self.v(r)))
        vs = lambda t: float(self.v(np.asarray(t)))
        if split < self.cutoff:
            total += self._quad(vs, split, self.cutoff, weight="cos", wvar=x)
            total -= self._quad(vs, split, self.cutoff)
        total += self._quad(vs, self.cutoff, np.inf, weight="cos", wvar=x)
        total -= self._quad(vs, self.cutoff, np.inf)
        return total

    def derivative(self, x: float) -> float:
        xs = float(x)
        x = abs(xs)
        if x == 0:
            return 0.0
        split = min(self.cutoff, 16 * math.pi / x)
        r, w = self._panels(split, x)
        total = -float(np.sum(w * r * np.sin(r * x) * self.v(r)))
        rv = lambda t: -t * float(self.v(np.asarray(t)))
        if split < self.cutoff:
            total += self._quad(rv, split, self.cutoff, weight="sin", wvar=x)
        total += self._quad(rv, self.cutoff, np.inf, weight="sin", wvar=x)
        return total if xs > 0 else -total


def _validate_density(v) -> None:
    probe = np.geomspace(1e-8, 1e3, 200)
    vals = np.asarray(v(probe), dtype=float)
    if vals.shape != probe.shape or not np.all(np.isfinite(vals)):
        raise ValueError("density must return finite values")
    if np.any(vals < 0):
        raise ValueError("density must be nonnegative")
    f = lambda t: min(t * t, 1.0) * float(v(np.asarray(t)))
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            near = integrate.quad(f, 0, 1, limit=200)[0]
            far = integrate.quad(f, 1, np.inf, limit=200)[0]
        except (integrate.IntegrationWarning, ZeroDivisionError, OverflowError) as exc:
            raise ValueError(f"density is not Lévy-integrable: {exc}") from None
    if not math.isfinite(near + far) or near + far > 1e100:
        raise ValueError("density is not Lévy-integrable (∫ min(r², 1) v dr diverges)")


class _TabulatedProfile:
    """Log-log cubic spline of -L for fast vectorized evaluation."""

    def __init__(self, engine: _DensityIntegrals, lo=1e-6, hi=1e4, per_decade=24):
        xs = np.geomspace(lo, hi, int(round(per_decade * math.log10(hi / lo))) + 1)
        vals = np.array([engine.value(x) for x in xs])
        self.zero = not np.any(vals < 0)
        if self.zero:
            return
        if np.any(vals >= 0):
            raise ValueError("profile must be strictly negative away from 0")
        self.lo, self.hi = lo, hi
        self.spline = CubicSpline(np.log(xs), np.log(-vals))
        self.lo_val, self.hi_val = -vals[0], -vals[-1]
        self.hi_slope = float(self.spline(np.log(hi), 1))

    def __call__(self, x: NDArray) -> NDArray:
        x = np.asarray(x, dtype=float)
        if self.zero:
            return np.zeros_like(x)
        out = np.zeros_like(x)
        mid = (x >= self.lo) & (x <= self.hi)
        out[mid] = -np.exp(self.spline(np.log(x[mid])))
        small = (x > 0) & (x < self.lo)
        out[small] = -self.lo_val * (x[small] / self.lo) ** 2
        big = x > self.hi
        out[big] = -self.hi_val * (x[big] / self.hi) ** self.hi_slope
        return out


def radial_profile_from_density(
    v: Callable[[NDArray], NDArray],
    cutoff: float = 50.0,
    substeps: int = 16,
    *,
    source: str = "density",
    params: dict | None = None,
) -> RadialProfile:
    """Profile L(x) = ∫_0^∞ (cos rx - 1) v(r) dr from a nonnegative density.

    The integral over [0, cutoff] uses composite Gauss-Legendre of order
    ``substeps`` on geometric panels (first panel 1e-6, ratio 1.5) that are
    split further where cos(rx) oscillates; for large x the oscillatory
    remainder and the part beyond ``cutoff`` use scipy's Fourier-weighted
    QUADPACK routines. ``tail_bound`` records 2∫_cutoff^∞ v, the worst-case
    error had the tail been dropped.

    The derivative is L′(x) = -∫_0^∞ r sin(rx) v(r) dr.

    Vectorized evaluation goes through a log-log spline tabulated on
    [1e-6, 1e4] with quadratic and power-law extrapolation; exact pointwise
    values come from ``profile.exact(x)``.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    if substeps < 2:
        raise ValueError("substeps must be >= 2")
    _validate_density(v)
    engine = _DensityIntegrals(v, cutoff, substeps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail = 2 * integrate.quad(lambda t: float(v(np.asarray(t))), cutoff, np.inf, limit=200)[0]
    table: list[_TabulatedProfile] = []

    def value(x):
        if not table:
            table.append(_TabulatedProfile(engine))
        return table[0](x)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        return np.vectorize(engine.derivative, otypes=[float])(x)

    prof = RadialProfile(value, derivative, source, kink=0.0, params=params, tail_bound=tail)
    prof.exact = lambda x: np.vectorize(engine.value, otypes=[float])(np.asarray(x, dtype=float))
    prof.density = v
    return prof


def relativistic_profile(alpha: float, n: int, cutoff: float = 50.0, substeps: int = 16) -> RadialProfile:
    """Profile of the synthetic relativistic density (see :func:`relativistic_density`)."""
    return radial_profile_from_density(
        relativistic_density(alpha, n), cutoff, substeps,
        source="relativistic", params={"alpha": alpha, "n": n},
    )


def relativistic_exponent(xi, alpha: float, mass: float = 1.0):
    """(|ξ|² + M^{2/α})^{α/2} - M, evaluated stably for large |ξ|."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    if not mass > 0:
        raise ValueError("mass must be positive")
    xi = np.asarray(xi, dtype=float)
    s = np.sum(xi * xi, axis=-1)
    c = mass ** (2 / alpha)
    # a^{α/2} - c^{α/2} = c^{α/2}·expm1((α/2)·log1p(s/c))
    return mass * np.expm1(alpha / 2 * np.log1p(s / c))


# ---------------------------------------------------------------------------
# quadrature-ratio engine


def _check_xi(xi, n: int) -> NDArray:
    xi = np.asarray(xi, dtype=float)
    if xi.shape[-1] != n:
        raise ValueError(f"frequency must have {n} components, got shape {xi.shape}")
    return xi


def _ratio_sums(xi: NDArray, rule: QuadratureRule, kernel: Callable, phi: AngularModulator):
    """Σ w K(ξ·θ) φ(θ) and Σ w K(ξ·θ) for each nonzero ξ in the (N, n) batch."""
    norms = np.linalg.norm(xi, axis=1)
    oriented = rule.family == "kink"
    num = np.empty(len(xi), dtype=complex)
    den = np.empty(len(xi))
    chunk = max(1, _CHUNK // (len(rule) * rule.n))
    for s in range(0, len(xi), chunk):
        sl = slice(s, s + chunk)
        if oriented:
            proj = norms[sl, None] * rule.nodes[None, :, 0]
        else:
            proj = xi[sl] @ rule.nodes.T
        kw = kernel(proj) * rule.weights[None, :]
        den[sl] = kw.sum(axis=1)
        if phi.is_constant:
            num[sl] = phi.value * den[sl]
            continue
        if phi.kind == "tabulated" and not oriented:
            vals = phi.table[None, :]
        elif oriented:
            vals = phi(orient_nodes(rule, xi[sl] / norms[sl, None]))
        else:
            vals = phi(rule.nodes)[None, :]
        num[sl] = np.sum(kw * vals, axis=1)
    return num, den


def _rule_for(n: int, level: int, kink: float, phi: AngularModulator) -> QuadratureRule:
    if phi.kind == "tabulated":
        if phi.n != n:
            raise ValueError("modulator dimension does not match symbol dimension")
        return phi.rule
    return _cached_kink_rule(n, level, float(kink))


_RULE_CACHE: dict[tuple, QuadratureRule] = {}


def _cached_kink_rule(n: int, level: int, kink: float) -> QuadratureRule:
    key = (n, level, kink)
    rule = _RULE_CACHE.get(key)
    if rule is None:
        rule = kink_quadrature(n, level, kink)
        if len(_RULE_CACHE) > 256:
            _RULE_CACHE.clear()
        _RULE_CACHE[key] = rule
    return rule


def _power_kernel(r: float):
    return lambda x: np.abs(x) ** r


def _apply_batch(xi, n, dc, fn):
    xi = _check_xi(xi, n)
    flat = xi.reshape(-1, n)
    out = np.full(len(flat), complex(dc), dtype=complex)
    nz = np.any(flat != 0, axis=1)
    if np.any(nz):
        out[nz] = fn(flat[nz])
    return out.reshape(xi.shape[:-1]) if xi.ndim > 1 else out[0]


def eval_stable_symbol(xi, r: float, phi: AngularModulator, rule: QuadratureRule | None = None):
    """Stable symbol Σ w|ξ·θ|^r φ(θ) / Σ w|ξ·θ|^r for a nonzero ξ (or a batch).

    Without an explicit rule an axis-adapted rule of the default level is
    used. A fixed (non-adapted) rule is applied as given.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    if rule is None:
        rule = _rule_for(n, DEFAULT_LEVEL[n], r, phi)

    def fn(batch):
        # degree-0 homogeneous: evaluate on unit vectors so large r cannot overflow
        unit = batch / np.linalg.norm(batch, axis=1, keepdims=True)
        num, den = _ratio_sums(unit, rule, _power_kernel(r), phi)
        if np.any(den < 1e-300):
            raise ArithmeticError("stable denominator underflow")
        return num / den

    if np.all(xi.reshape(-1, n) == 0, axis=1).any():
        raise ValueError("the stable symbol is undefined at ξ = 0")
    return _apply_batch(xi, n, 0.0, fn)


def eval_mixed_symbol(xi, r: float, s: float, c_r: float, c_s: float, phi: AngularModulator,
                      rule_r: QuadratureRule | None = None, rule_s: QuadratureRule | None = None):
    """Symbol with kernel C_r|ξ·θ|^r + C_s|ξ·θ|^s (each term on its own adapted rule)."""
    if not 0 < r < s:
        raise ValueError("mixed symbol requires 0 < r < s")
    if c_r <= 0 or c_s < 0:
        raise ValueError("mixed symbol requires C_r > 0 and C_s >= 0")
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    rule_r = rule_r or _rule_for(n, DEFAULT_LEVEL[n], r, phi)
    rule_s = rule_s or _rule_for(n, DEFAULT_LEVEL[n], s, phi)

    def fn(batch):
        norms = np.linalg.norm(batch, axis=1)
        unit = batch / norms[:, None]
        nr, dr = _ratio_sums(unit, rule_r, _power_kernel(r), phi)
        if c_s == 0:
            return nr / dr
        ns, ds = _ratio_sums(unit, rule_s, _power_kernel(s), phi)
        # C_r|ξ|^r and C_s|ξ|^s rescaled by their common maximum (in logs)
        log_a = math.log(c_r) + r * np.log(norms)
        with np.errstate(divide="ignore"):
            log_b = np.log(c_s) + s * np.log(norms)
        top = np.maximum(log_a, log_b)
        a, b = np.exp(log_a - top), np.exp(log_b - top)
        return (a * nr + b * ns) / (a * dr + b * ds)

    if np.all(xi.reshape(-1, n) == 0, axis=1).any():
        raise ValueError("the mixed symbol is undefined at ξ = 0")
    return _apply_batch(xi, n, 0.0, fn)


def _general_sums(batch, profile: RadialProfile, phi, rule):
    num, den = _ratio_sums(batch, rule, profile, phi)
    # the sums of |L| bound cancellation; a relative floor flags ill-defined ratios
    scale = _ratio_sums(batch, rule, lambda x: np.abs(profile(x)), AngularModulator.constant(1.0, rule.n))[1]
    return num, den, scale


def eval_general_symbol(xi, profile: RadialProfile, phi: AngularModulator, rule: QuadratureRule | None = None):
    """Σ w L(ξ·θ)φ(θ) / Σ w L(ξ·θ); raises where the denominator vanishes."""
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    rule = rule or _rule_for(n, DEFAULT_LEVEL[n], profile.kink, phi)

    def fn(batch):
        num, den, scale = _general_sums(batch, profile, phi, rule)
        bad = np.abs(den) <= 1e-12 * scale
        if np.any(bad):
            raise ZeroDivisionError(
                f"vanishing denominator for the general symbol at ξ = {batch[np.argmax(bad)].tolist()}")
        return num / den

    if np.all(xi.reshape(-1, n) == 0, axis=1).any():
        raise ValueError("the general symbol is undefined at ξ = 0")
    return _apply_batch(xi, n, 0.0, fn)


def second_moment_matrices(atoms, masses, psi: AngularModulator):
    """A = Σ μ_k ψ(θ_k) θ_kθ_kᵀ (complex) and B = Σ μ_k θ_kθ_kᵀ for a discrete sphere measure."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    masses = np.asarray(masses, dtype=float).ravel()
    if len(atoms) != len(masses):
        raise ValueError("atoms and masses differ in length")
    if np.any(masses <= 0):
        raise ValueError("masses must be positive")
    if np.any(np.abs(np.linalg.norm(atoms, axis=1) - 1) > 1e-12):
        raise ValueError("sphere-measure atoms must be unit vectors")
    outer = atoms[:, :, None] * atoms[:, None, :]
    B = np.einsum("k,kij->ij", masses, outer)
    A = np.einsum("k,kij->ij", masses * psi(atoms), outer)
    return A, B


def eval_levy_gauss_symbol(xi, profile: RadialProfile, phi: AngularModulator, A, B,
                           rule: QuadratureRule | None = None):
    """Symbol of a symmetric Lévy process with Gaussian part.

    Sign convention: both parts enter with the nonnegative sign,

        m(ξ) = [Σ w (-L(ξ·θ)) φ(θ) + ξᵀAξ] / [Σ w (-L(ξ·θ)) + ξᵀBξ],

    i.e. the denominator is -ρ(ξ) ≥ 0 where ρ is the real Lévy exponent. A
    profile with L ≤ 0 and a PSD matrix B keep the denominator nonnegative.
    """
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=float)
    if A.shape != (n, n) or B.shape != (n, n):
        raise ValueError("A and B must be n×n")
    if not np.allclose(B, B.T) or np.min(np.linalg.eigvalsh((B + B.T) / 2)) < -1e-12:
        raise ValueError("B must be symmetric positive semidefinite")
    rule = rule or _rule_for(n, DEFAULT_LEVEL[n], profile.kink, phi)

    def fn(batch):
        num, den, scale = _general_sums(batch, profile, phi, rule)
        qa = np.einsum("ki,ij,kj->k", batch, A, batch)
        qb = np.einsum("ki,ij,kj->k", batch, B, batch)
        top, bottom = -num + qa, -den + qb
        bad = np.abs(bottom) <= 1e-12 * (scale + np.abs(qb))
        if np.any(bad):
            raise ZeroDivisionError(
                f"vanishing Lévy exponent at ξ = {batch[np.argmax(bad)].tolist()}")
        return top / bottom

    if np.all(xi.reshape(-1, n) == 0, axis=1).any():
        raise ValueError("the Lévy symbol is undefined at ξ = 0")
    return _apply_batch(xi, n, 0.0, fn)


def beurling_symbol(xi):
    """(ξ_1 - iξ_2)/(ξ_1 + iξ_2) for nonzero planar ξ."""
    xi = _check_xi(xi, 2)
    z = xi[..., 0] + 1j * xi[..., 1]
    if np.any(z == 0):
        raise ValueError("the Beurling symbol is undefined at ξ = 0")
    return np.conj(z) / z


def riesz_power_symbol(xi, k: int):
    """ξ_1^{2k}/|ξ|^{2k}; differs from the analytic R_1^{2k} by (-1)^k."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    xi = np.asarray(xi, dtype=float)
    s = np.sum(xi * xi, axis=-1)
    if np.any(s == 0):
        raise ValueError("the Riesz power symbol is undefined at ξ = 0")
    return (xi[..., 0] ** 2 / s) ** k


# ---------------------------------------------------------------------------
# symbol descriptors


class Symbol:
    """Base class: an immutable descriptor evaluable on (..., n) frequency arrays.

    ``symbol(xi)`` returns m(ξ) with the descriptor's ``dc`` value at ξ = 0.
    """

    family: str = ""
    n: int
    dc: complex

    def _evaluate(self, xi: NDArray) -> NDArray:
        raise NotImplementedError

    def __call__(self, xi) -> NDArray:
        return _apply_batch(xi, self.n, self.dc, self._evaluate)

    @property
    def est_error(self) -> float:
        return 0.0

    def reflected(self) -> "Symbol":
        """Descriptor of ξ ↦ m(-ξ); every family here is even, so itself."""
        return self


def _validate_n(n):
    if n not in (2, 3, 4):
        raise ValueError(f"unsupported dimension n={n}")


@dataclass(frozen=True, eq=False)
class Constant(Symbol):
    n: int
    c: complex = 1.0
    family = "constant"

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    @property
    def dc(self):
        return self.c

    def _evaluate(self, xi):
        return np.full(len(xi), self.c, dtype=complex)


@dataclass(frozen=True, eq=False)
class Beurling(Symbol):
    n: int = 2
    dc: complex = 0.0
    family = "beurling"

    def __post_init__(self):
        if self.n != 2:
            raise ValueError("the Beurling symbol is planar (n = 2)")

    def _evaluate(self, xi):
        return beurling_symbol(xi)


@dataclass(frozen=True, eq=False)
class RieszPower(Symbol):
    n: int
    k: int = 1
    dc: complex = 0.0
    family = "riesz-power"

    def __post_init__(self):
        _validate_n(self.n)
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")

    def _evaluate(self, xi):
        return riesz_power_symbol(xi, self.k).astype(complex)


@dataclass(frozen=True, eq=False)
class Directional(Symbol):
    """Single-direction symbol |ξ·θ|^r/|ξ|^r."""

    n: int
    r: float
    direction: tuple = (1.0, 0.0)
    dc: complex = 0.0
    family = "directional"

    def __post_init__(self):
        _validate_n(self.n)
        if not self.r > 0:
            raise ValueError("r must be positive")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (self.n,) or abs(np.linalg.norm(d) - 1) > 1e-12:
            raise ValueError("direction must be a unit vector of length n")
        object.__setattr__(self, "direction", tuple(float(t) for t in d))

    def _evaluate(self, xi):
        d = np.asarray(self.direction)
        return (np.abs(xi @ d) / np.linalg.norm(xi, axis=1)) ** self.r + 0j


@dataclass(frozen=True, eq=False)
class Stable(Symbol):
    n: int
    r: float
    phi: AngularModulator
    level: int | None = None
    dc: complex = 0.0
    family = "stable"

    def __post_init__(self):
        _validate_n(self.n)
        if not self.r > 0:
            raise ValueError("Stable requires r > 0")
        if self.phi.kind != "constant" and self.phi.n != self.n:
            raise ValueError("modulator dimension does not match")
        object.__setattr__(self, "level", self.level or DEFAULT_LEVEL[self.n])

    @cached_property
    def rule(self) -> QuadratureRule:
        return _rule_for(self.n, self.level, self.r, self.phi)

    @property
    def est_error(self):
        return self.rule.est_error

    def _evaluate(self, xi):
        return eval_stable_symbol(xi, self.r, self.phi, self.rule)


@dataclass(frozen=True, eq=False)
class Mixed(Symbol):
    n: int
    r: float
    s: float
    c_r: float
    c_s: float
    phi: AngularModulator
    level: int | None = None
    dc: complex = 0.0
    family = "mixed"

    def __post_init__(self):
        _validate_n(self.n)
        if not 0 < self.r < self.s:
            raise ValueError("Mixed requires 0 < r < s")
        if not (self.c_r > 0 and self.c_s > 0):
            raise ValueError("Mixed requires C_r > 0 and C_s > 0")
        object.__setattr__(self, "level", self.level or DEFAULT_LEVEL[self.n])

    @cached_property
    def rules(self):
        return (_rule_for(self.n, self.level, self.r, self.phi),
                _rule_for(self.n, self.level, self.s, self.phi))

    @property
    def est_error(self):
        return max(rule.est_error for rule in self.rules)

    def _evaluate(self, xi):
        return eval_mixed_symbol(xi, self.r, self.s, self.c_r, self.c_s, self.phi, *self.rules)


@dataclass(frozen=True, eq=False)
class GeneralL(Symbol):
    n: int
    profile: RadialProfile
    phi: AngularModulator
    level: int | None = None
    dc: complex = 0.0
    family = "general"

    def __post_init__(self):
        _validate_n(self.n)
        object.__setattr__(self, "level", self.level or DEFAULT_LEVEL[self.n])

    @cached_property
    def rule(self):
        return _rule_for(self.n, self.level, self.profile.kink, self.phi)

    @property
    def est_error(self):
        return self.rule.est_error

    def _evaluate(self, xi):
        return eval_general_symbol(xi, self.profile, self.phi, self.rule)


@dataclass(frozen=True, eq=False)
class LevyGauss(Symbol):
    n: int
    profile: RadialProfile
    phi: AngularModulator
    A: Any = None
    B: Any = None
    level: int | None = None
    dc: complex = 0.0
    family = "levy-gauss"

    def __post_init__(self):
        _validate_n(self.n)
        A = np.zeros((self.n, self.n), complex) if self.A is None else np.array(self.A, dtype=complex)
        B = np.zeros((self.n, self.n)) if self.B is None else np.array(self.B, dtype=float)
        A.flags.writeable = False
        B.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "level", self.level or DEFAULT_LEVEL[self.n])

    @cached_property
    def rule(self):
        return _rule_for(self.n, self.level, self.profile.kink, self.phi)

    def _evaluate(self, xi):
        return eval_levy_gauss_symbol(xi, self.profile, self.phi, self.A, self.B, self.rule)


# ---------------------------------------------------------------------------
# JSON


def _cpair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_json(M) -> list:
    M = np.asarray(M)
    if np.iscomplexobj(M):
        return [[_cpair(v) for v in row] for row in M]
    return M.tolist()


def _matrix_from_json(doc, complex_entries: bool):
    arr = np.asarray(doc, dtype=float)
    if complex_entries and arr.ndim == 3:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr


def symbol_to_json(sym: Symbol) -> dict:
    """Serialize a descriptor to the {"family", "n", "r", "phi", "dc", ...} document."""
    doc: dict[str, Any] = {"family": sym.family, "n": sym.n}
    if isinstance(sym, Constant):
        doc["c"] = _cpair(sym.c)
    elif isinstance(sym, RieszPower):
        doc["k"] = sym.k
    elif isinstance(sym, Directional):
        doc.update(r=sym.r, direction=list(sym.direction))
    elif isinstance(sym, Stable):
        doc.update(r=sym.r, phi=sym.phi.to_json(), level=sym.level)
    elif isinstance(sym, Mixed):
        doc.update(r=sym.r, s=sym.s, c_r=sym.c_r, c_s=sym.c_s, phi=sym.phi.to_json(), level=sym.level)
    elif isinstance(sym, GeneralL):
        doc.update(profile=sym.profile.to_json(), phi=sym.phi.to_json(), level=sym.level)
    elif isinstance(sym, LevyGauss):
        doc.update(profile=sym.profile.to_json(), phi=sym.phi.to_json(), level=sym.level,
                   A=_matrix_json(sym.A), B=_matrix_json(sym.B))
    doc["dc"] = _cpair(sym.dc)
    return doc


def symbol_from_json(doc: dict) -> Symbol:
    """Inverse of :func:`symbol_to_json`; raises ValueError on malformed documents."""
    if not isinstance(doc, dict):
        raise ValueError("symbol document must be a JSON object")
    try:
        family = doc["family"]
        n = int(doc.get("n", 2))
        dc = complex(*doc.get("dc", [0.0, 0.0]))
        level = doc.get("level")

        def phi():
            return AngularModulator.from_json(doc.get("phi", {"kind": "constant"}), n)

        if family == "constant":
            return Constant(n, complex(*doc.get("c", [1.0, 0.0])))
        if family == "beurling":
            return Beurling(n, dc)
        if family == "riesz-power":
            return RieszPower(n, int(doc.get("k", 1)), dc)
        if family == "directional":
            default = [1.0] + [0.0] * (n - 1)
            return Directional(n, float(doc["r"]), tuple(doc.get("direction", default)), dc)
        if family == "stable":
            return Stable(n, float(doc["r"]), phi(), level, dc)
        if family == "mixed":
            return Mixed(n, float(doc["r"]), float(doc["s"]), float(doc["c_r"]), float(doc["c_s"]),
                         phi(), level, dc)
        if family == "general":
            return GeneralL(n, RadialProfile.from_json(doc["profile"]), phi(), level, dc)
        if family == "levy-gauss":
            A = _matrix_from_json(doc["A"], True) if "A" in doc else None
            B = _matrix_from_json(doc["B"], False) if "B" in doc else None
            return LevyGauss(n, RadialProfile.from_json(doc["profile"]), phi(), A, B, level, dc)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed symbol document: {exc!r}") from None
    raise ValueError(f"unknown symbol family {family!r}")
