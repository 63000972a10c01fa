"""Compound-Poisson martingale transforms on a periodic box.

A finite symmetric Lévy measure ν = Σ_j λ_j δ_{z_j} drives the jump process.
The space-time harmonic function V(x, τ) = P_τ f(x) is evaluated modally:
only the nonzero Fourier modes of f are kept, and

    V(x, τ) = Σ_m a_m e^{τ ρ(ξ_m)} e^{i ξ_m·x},   ρ(ξ) = Σ_j λ_j (cos(ξ·z_j) - 1).

The transform by φ is the compensated jump sum of φ(z)·ΔV; its conditional
expectation given the terminal position approximates the multiplier with
symbol ρ_φ(ξ)/ρ(ξ), ρ_φ(ξ) = Σ_j λ_j φ(z_j)(cos(ξ·z_j) - 1).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .spectral import GridField, GridSpec
from .symbols import AngularModulator

__all__ = [
    "JumpModel",
    "PathBatch",
    "PathRecord",
    "ProjectionEstimate",
    "TransformResult",
    "atom_modulation",
    "characteristic_function",
    "limiting_symbol",
    "project_conditional",
    "projected_coefficient",
    "semigroup_field",
    "simulate_paths",
    "transform_terminal_value",
    "transform_terminal_values",
]

_MODE_TOL = 1e-13
_CHUNK = 1 << 20


@dataclass(frozen=True, eq=False)
class JumpModel:
    """Finite symmetric discrete Lévy measure on R^n (n = 1 or 2)."""

    n: int
    atoms: NDArray[np.float64]
    rates: NDArray[np.float64]

    def __post_init__(self):
        z = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        lam = np.asarray(self.rates, dtype=float).ravel()
        if self.n not in (1, 2):
            raise ValueError("jump models support n = 1 or 2")
        if z.shape != (len(lam), self.n):
            raise ValueError(f"atoms must have shape (J, {self.n}) matching the rates")
        if len(lam) == 0:
            raise ValueError("at least one atom is required")
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise ValueError("rates must be positive and finite")
        if np.any(np.linalg.norm(z, axis=1) == 0):
            raise ValueError("atoms at the origin are not allowed")
        for zi, li in zip(z, lam):
            match = np.all(np.abs(z + zi) <= 1e-12 * (1 + np.abs(zi)), axis=1)
            if not np.any(match & (np.abs(lam - li) <= 1e-12 * li)):
                raise ValueError(f"measure is not symmetric: -{zi.tolist()} with rate {li} is missing")
        z.flags.writeable = False
        lam.flags.writeable = False
        object.__setattr__(self, "atoms", z)
        object.__setattr__(self, "rates", lam)

    @classmethod
    def symmetric(cls, half_atoms: Sequence[Sequence[float]], rates: Sequence[float]) -> "JumpModel":
        """Model with atoms ±z_j, each carrying rate λ_j."""
        z = np.atleast_2d(np.asarray(half_atoms, dtype=float))
        lam = np.asarray(rates, dtype=float).ravel()
        return cls(z.shape[1], np.concatenate([z, -z]), np.concatenate([lam, lam]))

    @property
    def total_rate(self) -> float:
        return float(self.rates.sum())

    def scaled(self, factor: float) -> "JumpModel":
        return JumpModel(self.n, self.atoms, self.rates * factor)

    def exponent(self, xi) -> NDArray:
        """ρ(ξ) = Σ_j λ_j (cos(ξ·z_j) - 1) ≤ 0 for (..., n) arrays."""
        xi = np.asarray(xi, dtype=float)
        return (np.cos(xi @ self.atoms.T) - 1.0) @ self.rates

    def modulated_exponent(self, xi, weights) -> NDArray:
        """ρ_φ(ξ) = Σ_j λ_j φ_j (cos(ξ·z_j) - 1)."""
        xi = np.asarray(xi, dtype=float)
        return (np.cos(xi @ self.atoms.T) - 1.0) @ (self.rates * np.asarray(weights))

    def to_json(self) -> dict:
        return {"n": self.n, "atoms": [{"z": z.tolist(), "rate": float(l)}
                                       for z, l in zip(self.atoms, self.rates)]}

    @classmethod
    def from_json(cls, doc: dict | str) -> "JumpModel":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            n = int(doc["n"])
            atoms = [a["z"] for a in doc["atoms"]]
            rates = [a["rate"] for a in doc["atoms"]]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed model document: {exc!r}") from None
        return cls(n, np.asarray(atoms, dtype=float).reshape(len(atoms), n), rates)


def atom_modulation(model: JumpModel, phi: AngularModulator | Sequence[complex]) -> NDArray:
    """φ(z_j/|z_j|) per atom; bounded by 1 (rounding above 1 is clipped)."""
    if isinstance(phi, AngularModulator):
        dirs = model.atoms / np.linalg.norm(model.atoms, axis=1, keepdims=True)
        vals = np.asarray(phi(dirs), dtype=complex)
    else:
        vals = np.asarray(phi, dtype=complex).ravel()
        if vals.shape != model.rates.shape:
            raise ValueError("one modulation value per atom is required")
    mod = np.abs(vals)
    if np.any(mod > 1 + 1e-12):
        raise ValueError("atom modulation exceeds 1 in modulus")
    return np.where(mod > 1, vals / np.maximum(mod, 1.0), vals)


def limiting_symbol(model: JumpModel, weights, xi) -> NDArray:
    """m_ν(ξ) = ρ_φ(ξ)/ρ(ξ)."""
    rho = model.exponent(xi)
    if np.any(rho == 0):
        raise ZeroDivisionError("ρ(ξ) vanishes at a requested frequency")
    return model.modulated_exponent(xi, weights) / rho


def _check_dims(model: JumpModel, spec: GridSpec):
    if model.n != spec.n:
        raise ValueError(f"model dimension {model.n} != grid dimension {spec.n}")


def semigroup_field(f: GridField, t: float, model: JumpModel) -> GridField:
    """P_t f: Fourier coefficients multiplied by e^{tρ(ξ)}."""
    _check_dims(model, f.spec)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return GridField(f.spec, f.samples.copy())
    factor = np.exp(t * model.exponent(f.spec.frequencies()))
    return GridField(f.spec, np.fft.ifftn(factor * np.fft.fftn(f.samples)))


@dataclass(frozen=True)
class _Modes:
    xi: NDArray        # (M, n)
    coeff: NDArray     # (M,) complex, so that f(x) = Σ coeff e^{iξ·x}
    rho: NDArray       # (M,)


def _modes(f: GridField, model: JumpModel) -> _Modes:
    coeffs = np.fft.fftn(f.samples) / f.samples.size
    # the DFT sample index is tied to x = index·h; e^{iξ·x} evaluated at grid points reproduces f
    keep = np.abs(coeffs) > _MODE_TOL * max(np.abs(coeffs).max(), 1e-300)
    xi = f.spec.frequencies()[keep]
    return _Modes(xi, coeffs[keep], model.exponent(xi))


def _evaluate_modes(modes: _Modes, x: NDArray, tau: NDArray, extra: NDArray | None = None) -> NDArray:
    """Σ_m c_m e^{τρ_m} e^{iξ_m·x} for paired rows of x (K, n) and τ (K,)."""
    c = modes.coeff if extra is None else modes.coeff * extra
    out = np.empty(len(x), dtype=complex)
    step = max(1, _CHUNK // max(len(c), 1))
    for s in range(0, len(x), step):
        sl = slice(s, s + step)
        phase = np.exp(1j * (x[sl] @ modes.xi.T) + tau[sl, None] * modes.rho[None, :])
        out[sl] = phase @ c
    return out


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PathRecord:
    times: NDArray
    atoms: NDArray
    x0: NDArray
    xT: NDArray


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Struct-of-arrays storage for many paths.

    Path p owns jumps ``offsets[p]:offsets[p+1]`` of ``times``/``atoms``.
    """

    model: JumpModel
    spec: GridSpec
    T: float
    seed: int
    x0: NDArray
    xT: NDArray
    offsets: NDArray
    times: NDArray
    atoms: NDArray

    def __len__(self) -> int:
        return len(self.x0)

    @property
    def counts(self) -> NDArray:
        return np.diff(self.offsets)

    def path(self, p: int) -> PathRecord:
        sl = slice(self.offsets[p], self.offsets[p + 1])
        return PathRecord(self.times[sl], self.atoms[sl], self.x0[p], self.xT[p])

    def displacement(self) -> NDArray:
        """Unwrapped x_T - x_0 per path (Σ of the jump atoms)."""
        owner = np.repeat(np.arange(len(self)), self.counts)
        disp = np.zeros_like(self.x0)
        np.add.at(disp, owner, self.model.atoms[self.atoms])
        return disp


def simulate_paths(model: JumpModel, T: float, count: int, seed: int, spec: GridSpec,
                   start: str = "uniform") -> PathBatch:
    """Simulate ``count`` compound-Poisson paths on [0, T].

    Jump times come from exponential inter-arrivals at the total rate Λ and
    atoms are chosen with probability λ_j/Λ. ``start`` is "uniform" (continuous
    uniform on the box) or "lattice" (uniform over grid points).
    """
    _check_dims(model, spec)
    if count < 1:
        raise ValueError("count must be >= 1")
    if not T > 0:
        raise ValueError("T must be positive")
    rng = np.random.default_rng(seed)
    box = np.asarray(spec.box)
    if start == "uniform":
        x0 = rng.uniform(size=(count, spec.n)) * box
    elif start == "lattice":
        idx = np.stack([rng.integers(0, s, size=count) for s in spec.shape], axis=1)
        x0 = idx * (box / np.asarray(spec.shape))
    else:
        raise ValueError(f"unknown start mode {start!r}")

    lam = model.total_rate
    mean = lam * T
    block = int(math.ceil(mean + 6 * math.sqrt(mean) + 8))
    arrivals = np.cumsum(rng.exponential(1 / lam, size=(count, block)), axis=1)
    while np.any(arrivals[:, -1] <= T):
        more = np.cumsum(rng.exponential(1 / lam, size=(count, block)), axis=1) + arrivals[:, -1:]
        arrivals = np.concatenate([arrivals, more], axis=1)
    mask = arrivals <= T
    counts = mask.sum(axis=1)
    times = arrivals[mask]                                   # row-major: grouped by path, sorted
    probs = model.rates / lam
    atoms = rng.choice(len(probs), size=len(times), p=probs)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    owner = np.repeat(np.arange(count), counts)
    disp = np.zeros((count, spec.n))
    np.add.at(disp, owner, model.atoms[atoms])
    xT = np.mod(x0 + disp, box)
    return PathBatch(model, spec, float(T), int(seed), x0, xT, offsets, times, atoms)


def characteristic_function(batch: PathBatch, xi) -> tuple[NDArray, NDArray]:
    """Empirical E e^{iξ·(x_T - x_0)} and its standard error at each ξ."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    vals = np.exp(1j * batch.displacement() @ xi.T)
    mean = vals.mean(axis=0)
    se = np.sqrt((np.var(vals.real, axis=0, ddof=1) + np.var(vals.imag, axis=0, ddof=1)) / len(batch))
    return mean, se


# ---------------------------------------------------------------------------
# martingale transform


@dataclass(frozen=True)
class TransformResult:
    """Per-path outputs of the transform.

    ``transform`` is φ⋆V at time T, ``base_increment`` is V(Z_T) - V(Z_0),
    ``qv_base``/``qv_transform`` are the jump-sum quadratic variations
    Σ|ΔV|² and Σ|φ ΔV|².
    """

    transform: NDArray
    base_increment: NDArray
    qv_base: NDArray
    qv_transform: NDArray
    jump_sum: NDArray
    compensator: NDArray


def _richardson_trapezoid(substeps: int) -> tuple[NDArray, NDArray]:
    """Nodes/weights on [0, 1] of (4·T_{h/2} - T_h)/3 with T_h the trapezoid on ``substeps`` pieces."""
    fine = np.full(2 * substeps + 1, 1.0 / (2 * substeps))
    fine[[0, -1]] *= 0.5
    coarse = np.zeros(2 * substeps + 1)
    coarse[::2] = 1.0 / substeps
    coarse[[0, -1]] *= 0.5
    return np.linspace(0.0, 1.0, 2 * substeps + 1), (4 * fine - coarse) / 3


def transform_terminal_values(batch: PathBatch, f: GridField, phi, substeps: int = 16) -> TransformResult:
    """Compensated jump sums Σ φ(z)ΔV - ∫_0^T Σ_j λ_j φ_j [V(x+z_j) - V(x)] ds for every path.

    The time integral on each inter-jump segment combines trapezoid sums with
    ``substeps`` and 2·``substeps`` uniform pieces by one Richardson step.
    """
    model, T = batch.model, batch.T
    if f.spec != batch.spec:
        raise ValueError("field grid differs from the simulation grid")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    weights = atom_modulation(model, phi)
    modes = _modes(f, model)
    P = len(batch)
    counts = batch.counts
    owner = np.repeat(np.arange(P), counts)

    # pre-jump positions: x0 plus the atoms of earlier jumps on the same path
    steps = model.atoms[batch.atoms]
    cum0 = np.concatenate([np.zeros((1, model.n)), np.cumsum(steps, axis=0)])
    jump_id = np.arange(len(steps))
    before = batch.x0[owner] + cum0[jump_id] - cum0[batch.offsets[owner]]
    tau = T - batch.times
    v_before = _evaluate_modes(modes, before, tau)
    v_after = _evaluate_modes(modes, before + steps, tau)
    dv = v_after - v_before
    phi_j = weights[batch.atoms]
    phi_sq = np.minimum(phi_j.real ** 2 + phi_j.imag ** 2, 1.0)
    jump_sum = np.bincount(owner, weights=(phi_j * dv).real, minlength=P) + 1j * np.bincount(
        owner, weights=(phi_j * dv).imag, minlength=P)
    qv_base = np.bincount(owner, weights=np.abs(dv) ** 2, minlength=P)
    qv_transform = np.bincount(owner, weights=phi_sq * np.abs(dv) ** 2, minlength=P)

    # compensator: segments [t_{i}, t_{i+1}] with the position after jump i
    seg_pos = np.concatenate([batch.x0, before + steps])
    seg_owner = np.concatenate([np.arange(P), owner])
    seg_lo = np.concatenate([np.zeros(P), batch.times])
    is_last = jump_id + 1 == batch.offsets[owner + 1]
    following = np.append(batch.times[1:], T)
    first = np.where(counts > 0, np.append(batch.times, T)[batch.offsets[:-1]], T)
    seg_hi = np.concatenate([first, np.where(is_last, T, following)])
    xi_z = modes.xi @ model.atoms.T                          # (M, J)
    g_phi = (np.exp(1j * xi_z) - 1.0) @ (model.rates * weights)
    nodes, tw = _richardson_trapezoid(substeps)
    # Σ_k w_k e^{(T - s_k)ρ_m} per segment, then the spatial phase
    length = seg_hi - seg_lo
    comp = np.empty(len(seg_pos), dtype=complex)
    step = max(1, _CHUNK // max(len(modes.rho) * len(nodes), 1))
    for s in range(0, len(seg_pos), step):
        sl = slice(s, s + step)
        s_k = seg_lo[sl, None] + length[sl, None] * nodes[None, :]
        time_fac = np.einsum("k,skm->sm", tw, np.exp((T - s_k)[:, :, None] * modes.rho[None, None, :]))
        phase = np.exp(1j * seg_pos[sl] @ modes.xi.T)
        comp[sl] = length[sl] * ((phase * time_fac) @ (modes.coeff * g_phi))
    compensator = np.bincount(seg_owner, weights=comp.real, minlength=P) + 1j * np.bincount(
        seg_owner, weights=comp.imag, minlength=P)

    v_end = _evaluate_modes(modes, batch.xT, np.zeros(P))
    v_start = _evaluate_modes(modes, batch.x0, np.full(P, T))
    return TransformResult(jump_sum - compensator, v_end - v_start, qv_base, qv_transform,
                           jump_sum, compensator)


def transform_terminal_value(path: PathRecord, f: GridField, phi, model: JumpModel, T: float,
                             substeps: int = 16) -> complex:
    """Single-path convenience wrapper around :func:`transform_terminal_values`."""
    spec = f.spec
    batch = PathBatch(model, spec, float(T), -1, np.atleast_2d(path.x0), np.atleast_2d(path.xT),
                      np.array([0, len(path.times)]), np.asarray(path.times, float),
                      np.asarray(path.atoms, int))
    return complex(transform_terminal_values(batch, f, phi, substeps).transform[0])


# ---------------------------------------------------------------------------
# conditional projection


@dataclass(frozen=True, eq=False)
class ProjectionEstimate:
    spec: GridSpec
    mean: NDArray
    counts: NDArray
    stderr: NDArray
    usable: NDArray
    meta: dict = field(default_factory=dict)

    def as_field(self) -> GridField:
        return GridField(self.spec, np.where(self.usable, self.mean, 0))


def _bin_index(x: NDArray, spec: GridSpec) -> NDArray:
    h = np.asarray(spec.box) / np.asarray(spec.shape)
    idx = np.mod(np.rint(x / h).astype(np.int64), np.asarray(spec.shape))
    return np.ravel_multi_index(tuple(idx.T), spec.shape)


def project_conditional(batch: PathBatch, values: NDArray, spec: GridSpec | None = None,
                        min_per_bin: int = 2) -> ProjectionEstimate:
    """Bin terminal positions to grid cells; per-cell mean and standard error of ``values``."""
    spec = spec or batch.spec
    values = np.asarray(values, dtype=complex)
    if values.shape != (len(batch),):
        raise ValueError("one value per path is required")
    flat = _bin_index(batch.xT, spec)
    size = int(np.prod(spec.shape))
    counts = np.bincount(flat, minlength=size)
    s_re = np.bincount(flat, weights=values.real, minlength=size)
    s_im = np.bincount(flat, weights=values.imag, minlength=size)
    mean = (s_re + 1j * s_im) / np.maximum(counts, 1)
    dev = np.abs(values - mean[flat]) ** 2
    ss = np.bincount(flat, weights=dev, minlength=size)
    usable = counts >= max(min_per_bin, 2)
    var = np.where(usable, ss / np.maximum(counts - 1, 1), np.nan)
    stderr = np.sqrt(var / np.maximum(counts, 1))
    if not np.any(usable):
        raise ValueError("no grid cell has enough paths")
    shape = spec.shape
    return ProjectionEstimate(spec, mean.reshape(shape), counts.reshape(shape), stderr.reshape(shape),
                              usable.reshape(shape), {"min_per_bin": min_per_bin, "paths": len(batch),
                                                      "seed": batch.seed})


def projected_coefficient(batch: PathBatch, values: NDArray, xi) -> tuple[complex, float]:
    """Fourier coefficient of the conditional expectation at ξ, with its standard error.

    Terminal positions are uniform on the box, so the sample mean of
    value·e^{-iξ·x_T} estimates (1/|box|) ∫ E[value | x_T = x] e^{-iξ·x} dx.
    """
    xi = np.asarray(xi, dtype=float)
    terms = np.asarray(values) * np.exp(-1j * batch.xT @ xi)
    mean = complex(terms.mean())
    se = float(np.sqrt((np.var(terms.real, ddof=1) + np.var(terms.imag, ddof=1)) / len(terms)))
    return mean, se
