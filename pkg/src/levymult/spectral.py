"""Periodic grid fields, FFT application of symbols, and norm/ratio probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .numerics import gamma_ratio
from .symbols import AngularModulator, Beurling, Stable, Symbol

__all__ = [
    "BoundReport",
    "GridField",
    "GridSpec",
    "apply_multiplier",
    "beurling_identity_error",
    "bound_factor",
    "conjugate_exponent",
    "estimate_lp_ratio",
    "extremal_field",
    "gaussian_bump",
    "l2_operator_norm",
    "lp_norm",
    "standard_ensemble",
    "symbol_on_grid",
    "weak_l1_ratio",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid; frequencies are ξ = 2π·k/L with wrapped k."""

    shape: tuple[int, ...]
    box: tuple[float, ...]

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        box = tuple(float(b) for b in self.box)
        if not 1 <= len(shape) <= 3:
            raise ValueError("grid fields support dimensions 1 to 3")
        if len(box) != len(shape):
            raise ValueError("box and shape must have the same length")
        if any(s < 8 or s % 2 for s in shape):
            raise ValueError(f"grid counts must be even and >= 8, got {shape}")
        if any(not (b > 0 and math.isfinite(b)) for b in box):
            raise ValueError("box lengths must be positive and finite")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "box", box)

    @property
    def n(self) -> int:
        return len(self.shape)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([b / s for b, s in zip(self.box, self.shape)]))

    @property
    def volume(self) -> float:
        return float(np.prod(self.box))

    def axes(self) -> list[NDArray]:
        return [np.arange(s) * (b / s) for s, b in zip(self.shape, self.box)]

    def coordinates(self) -> NDArray:
        """Sample positions, shape (*shape, n)."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def frequency_axes(self) -> list[NDArray]:
        return [2 * np.pi * np.fft.fftfreq(s, d=b / s) for s, b in zip(self.shape, self.box)]

    def frequencies(self) -> NDArray:
        """Lattice frequencies in FFT order, shape (*shape, n)."""
        return np.stack(np.meshgrid(*self.frequency_axes(), indexing="ij"), axis=-1)


@dataclass(frozen=True, eq=False)
class GridField:
    spec: GridSpec
    samples: NDArray[np.complex128]

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.shape != self.spec.shape:
            raise ValueError(f"samples shape {s.shape} != grid shape {self.spec.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("grid samples must be finite")
        object.__setattr__(self, "samples", s)

    def __add__(self, other: "GridField") -> "GridField":
        _same_grid(self, other)
        return GridField(self.spec, self.samples + other.samples)

    def __sub__(self, other: "GridField") -> "GridField":
        _same_grid(self, other)
        return GridField(self.spec, self.samples - other.samples)

    def scaled(self, c: complex) -> "GridField":
        return GridField(self.spec, c * self.samples)


def _same_grid(a: GridField, b: GridField):
    if a.spec != b.spec:
        raise ValueError("fields live on different grids")


def symbol_on_grid(m: Symbol, spec: GridSpec) -> NDArray[np.complex128]:
    """m evaluated at every lattice frequency (FFT order), with m(0) = dc."""
    if m.n != spec.n:
        raise ValueError(f"symbol dimension {m.n} != grid dimension {spec.n}")
    values = np.asarray(m(spec.frequencies()), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("symbol evaluation produced non-finite values on the grid")
    return values


def apply_multiplier(f: GridField, m: Symbol, values: NDArray | None = None) -> GridField:
    """T_m f via forward FFT, pointwise multiplication and inverse FFT.

    ``values`` may carry a precomputed :func:`symbol_on_grid` table.
    """
    if values is None:
        values = symbol_on_grid(m, f.spec)
    elif values.shape != f.spec.shape:
        raise ValueError("precomputed symbol table has the wrong shape")
    return GridField(f.spec, np.fft.ifftn(values * np.fft.fftn(f.samples)))


def lp_norm(f: GridField, p: float) -> float:
    """(Σ|f|^p · cell volume)^{1/p}; p = inf gives the max modulus."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.samples)
    if math.isinf(p):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * (np.sum((a / top) ** p) * f.spec.cell_volume) ** (1 / p))


def l2_operator_norm(m: Symbol, spec: GridSpec) -> float:
    """Exact L²→L² norm of the discrete operator: max |m| over all lattice points.

    The zero frequency contributes |dc|.
    """
    return float(np.max(np.abs(symbol_on_grid(m, spec))))


def extremal_field(m: Symbol, spec: GridSpec) -> GridField:
    """Plane wave at the lattice frequency where |m| is largest (first on ties)."""
    vals = np.abs(symbol_on_grid(m, spec))
    idx = np.unravel_index(int(np.argmax(vals)), spec.shape)
    xi = spec.frequencies()[idx]
    return GridField(spec, np.exp(1j * spec.coordinates() @ xi))


def conjugate_exponent(p: float) -> float:
    """p* = max{p, p/(p-1)}."""
    if not p > 1:
        raise ValueError("p must exceed 1")
    return p if math.isinf(p) else max(p, p / (p - 1))


BOUND_KINDS = ("conjecture", "thm-main", "thm-second", "dpv-riesz", "beurling")


def bound_factor(kind: str, p: float, n: int = 2, r: float | None = None, k: int | None = None) -> float:
    """Explicit p- and r-dependent factor of each bound, with unknown constants set to 1.

    conjecture: p*-1; thm-main: (p*-1)^{6n}·Γ((r+n)/2)/Γ((r+1)/2);
    thm-second: max{r^{n0}, 1}(p*-1) with n0 = ⌊n/2⌋+1; dpv-riesz: k^{1-2/p*} p*;
    beurling: 2(p*-1).
    """
    ps = conjugate_exponent(p)
    if kind == "conjecture":
        return ps - 1
    if kind == "beurling":
        return 2 * (ps - 1)
    if kind == "thm-main":
        if r is None:
            raise ValueError("thm-main needs r")
        return (ps - 1) ** (6 * n) * gamma_ratio(r, n)
    if kind == "thm-second":
        if r is None:
            raise ValueError("thm-second needs r")
        return max(r ** (n // 2 + 1), 1.0) * (ps - 1)
    if kind == "dpv-riesz":
        if k is None:
            raise ValueError("dpv-riesz needs k")
        return k ** (1 - 2 / ps) * ps
    raise ValueError(f"unknown bound kind {kind!r}; expected one of {BOUND_KINDS}")


@dataclass(frozen=True)
class BoundReport:
    p: float
    p_star: float
    r: float | None
    n: int
    observed_ratio: float
    bound_factor: float
    bound_kind: str
    passed: bool
    argmax_index: int
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": "lp-ratio",
            "params": {"p": self.p, "p_star": self.p_star, "r": self.r, "n": self.n,
                       "bound_kind": self.bound_kind},
            "measured": self.observed_ratio,
            "reference": self.bound_factor,
            "tol": 0.0,
            "pass": self.passed,
            "meta": {"argmax_index": self.argmax_index, **self.meta},
        }


# ---------------------------------------------------------------------------
# probe fields


def gaussian_bump(spec: GridSpec, width: float, center: Sequence[float] | None = None,
                  scales: Sequence[float] | None = None) -> GridField:
    """exp(-Σ((x_i-c_i)/(width·s_i))²/2), periodized by nearest image."""
    center = np.asarray(center if center is not None else [b / 2 for b in spec.box])
    scales = np.asarray(scales if scales is not None else np.ones(spec.n))
    d = spec.coordinates() - center
    box = np.asarray(spec.box)
    d = (d + box / 2) % box - box / 2
    return GridField(spec, np.exp(-0.5 * np.sum((d / (width * scales)) ** 2, axis=-1)) + 0j)


def _band_limited(spec: GridSpec, rng: np.random.Generator, band: int) -> GridField:
    coeffs = np.zeros(spec.shape, dtype=complex)
    freq_idx = np.stack(np.meshgrid(*[np.fft.fftfreq(s, 1 / s) for s in spec.shape], indexing="ij"), -1)
    mask = np.all(np.abs(freq_idx) <= band, axis=-1)
    count = int(mask.sum())
    coeffs[mask] = rng.normal(size=count) + 1j * rng.normal(size=count)
    return GridField(spec, np.fft.ifftn(coeffs) * np.prod(spec.shape))


def _power_field(spec: GridSpec, p: float, angular: bool) -> GridField:
    center = np.asarray(spec.box) / 2
    d = spec.coordinates() - center
    rad = np.linalg.norm(d, axis=-1)
    h = min(b / s for b, s in zip(spec.box, spec.shape))
    outer = min(spec.box) / 4
    cutoff = np.clip(1 - rad / outer, 0, None) ** 2
    vals = (rad + h) ** (-spec.n / p) * cutoff
    if angular and spec.n == 2:
        z = d[..., 0] + 1j * d[..., 1]
        vals = vals * np.where(rad > 0, z / np.maximum(rad, 1e-300), 0) ** 2
    return GridField(spec, vals + 0j)


def standard_ensemble(spec: GridSpec, seed: int = 0, p: float | None = None,
                      random_fields: int = 16) -> tuple[list[GridField], dict]:
    """Fixed probe composition for L^p ratio estimates.

    Five isotropic Gaussian widths, three anisotropic bumps, ``random_fields``
    seeded band-limited fields and, when ``p`` is given, truncated power
    functions |x|^{-n/p} with and without a second-harmonic angular factor.
    Returns the fields and a metadata dict recording composition and seed.
    """
    span = min(spec.box)
    fields = [gaussian_bump(spec, span * w) for w in (0.01, 0.02, 0.04, 0.06, 0.1)]
    for sc in ((1.0, 4.0), (4.0, 1.0), (1.0, 0.25)):
        scales = (list(sc) + [1.0] * spec.n)[: spec.n]
        fields.append(gaussian_bump(spec, span * 0.03, scales=scales))
    rng = np.random.default_rng(seed)
    bands = [2, 4, 8, 16]
    for i in range(random_fields):
        fields.append(_band_limited(spec, rng, bands[i % len(bands)]))
    if p is not None:
        fields.append(_power_field(spec, p, angular=False))
        fields.append(_power_field(spec, p, angular=True))
    meta = {"seed": seed, "gaussian_widths": [0.01, 0.02, 0.04, 0.06, 0.1],
            "anisotropic": 3, "random_fields": random_fields, "bands": bands,
            "power_fields": 0 if p is None else 2, "size": len(fields)}
    return fields, meta


def estimate_lp_ratio(m: Symbol, p: float, ensemble: Sequence[GridField], kind: str = "conjecture",
                      r: float | None = None, k: int | None = None, meta: dict | None = None) -> BoundReport:
    """Largest ‖T_m f‖_p/‖f‖_p over the ensemble, compared with a bound factor.

    Fields with ‖f‖_p < 1e-12 are skipped. The verdict treats every
    unspecified theorem constant as 1.
    """
    if not ensemble:
        raise ValueError("the ensemble is empty")
    if not 1 < p < math.inf:
        raise ValueError("p must lie in (1, ∞)")
    values = symbol_on_grid(m, ensemble[0].spec)
    best, where = 0.0, -1
    for i, f in enumerate(ensemble):
        denom = lp_norm(f, p)
        if denom < 1e-12:
            continue
        ratio = lp_norm(apply_multiplier(f, m, values), p) / denom
        if ratio > best:
            best, where = ratio, i
    factor = bound_factor(kind, p, m.n, r, k)
    info = dict(meta or {})
    info["constants_set_to_one"] = kind in ("thm-main", "thm-second", "dpv-riesz")
    return BoundReport(p, conjugate_exponent(p), r, m.n, best, factor, kind, best <= factor, where, info)


def weak_l1_ratio(m: Symbol, f: GridField, levels: int = 61) -> float:
    """max over λ of λ·|{|T_m f| > λ}|/‖f‖_1 on a log sweep of [1e-3, 1e3]·‖T_m f‖_∞."""
    norm1 = lp_norm(f, 1)
    if norm1 == 0:
        raise ValueError("the input field is zero")
    tf = np.abs(apply_multiplier(f, m).samples).ravel()
    top = tf.max()
    if top == 0:
        return 0.0
    lams = np.geomspace(1e-3, 1e3, levels) * top
    s = np.sort(tf)
    counts = len(s) - np.searchsorted(s, lams, side="right")
    return float(np.max(lams * counts * f.spec.cell_volume) / norm1)


def beurling_identity_error(r: float, f: GridField, level: int | None = None) -> float:
    """Relative L² distance between T_{m_r} f and (r/(r+2))·Bf."""
    if f.spec.n != 2:
        raise ValueError("the Beurling identity is planar")
    norm = lp_norm(f, 2)
    if norm == 0:
        return 0.0
    stable = apply_multiplier(f, Stable(2, r, AngularModulator.harmonic(), level))
    beur = apply_multiplier(f, Beurling())
    return lp_norm(stable - beur.scaled(r / (r + 2)), 2) / norm
