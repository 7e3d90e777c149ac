"""Seeded stochastic maximization of w_p over protocol parameters.

Two-phase search: Haar-uniform exploration of the parameter box (80% of
the evaluation budget), then coordinate-wise golden-section refinement
around the best few well-separated exploration candidates (the rest).
Polar angles are drawn with cos(theta) uniform so pure-state directions
are Haar distributed; mixedness and time are drawn uniformly.

Randomness comes from the counter-based Philox-4x64-10 generator keyed by
a 64-bit seed, so runs are bit-reproducible and exploration chunks can be
evaluated in any partition without changing the sampled points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .battery import HamiltonianSpec
from .errors import ConfigError, DomainError
from .protocol import joint_eig

SEPARABLE = "separable"
ENTANGLED = "entangled"

# Per-coordinate draw kinds, in parameter-vector order.
_COLUMNS = {
    SEPARABLE: ("unit", "polar", "azimuth", "time", "polar", "azimuth"),
    ENTANGLED: ("polar", "azimuth", "time", "polar", "azimuth"),
}
_NAMES = {
    SEPARABLE: ("r", "theta_aux", "phi_aux", "t", "theta_meas", "phi_meas"),
    ENTANGLED: ("theta_schmidt", "phi_schmidt", "t", "theta_meas", "phi_meas"),
}

EXPLORE_FRACTION = 0.8
SAMPLE_CHUNK = 8192  # full chunks are always drawn, so sample i never depends on the budget
CONVERGENCE_WINDOW_TOL = 1e-2  # units of h, over the trailing budget/5 evaluations
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_REFINE_CYCLES = 16


@dataclass(frozen=True)
class SearchSpace:
    """Protocol parameter box for one initial-state family at fixed k.

    ``separable`` searches (r, theta_aux, phi_aux, t, theta_meas, phi_meas);
    ``entangled`` searches (theta_schmidt, phi_schmidt, t, theta_meas,
    phi_meas). Times range over [0, t_max].
    """

    family: str
    k: float
    t_max: float = 10.0

    def __post_init__(self):
        if self.family not in _COLUMNS:
            raise ConfigError(f"unknown family {self.family!r}")
        if abs(self.k) > 1.0:
            raise DomainError(f"population bias k must lie in [-1, 1], got {self.k}")
        if not (self.t_max > 0.0 and math.isfinite(self.t_max)):
            raise ConfigError(f"t_max must be positive and finite, got {self.t_max}")

    @property
    def n_params(self) -> int:
        return len(_COLUMNS[self.family])

    @property
    def param_names(self) -> tuple[str, ...]:
        return _NAMES[self.family]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        spans = {"unit": 1.0, "polar": math.pi, "azimuth": 2.0 * math.pi, "time": self.t_max}
        hi = np.array([spans[kind] for kind in _COLUMNS[self.family]])
        return np.zeros_like(hi), hi

    def transform(self, u: np.ndarray) -> np.ndarray:
        """Map uniform [0,1) draws (last axis = coordinates) into the box."""
        out = np.empty_like(u)
        for c, kind in enumerate(_COLUMNS[self.family]):
            col = u[..., c]
            if kind == "polar":
                out[..., c] = np.arccos(1.0 - 2.0 * col)
            elif kind == "azimuth":
                out[..., c] = 2.0 * math.pi * col
            elif kind == "time":
                out[..., c] = self.t_max * col
            else:
                out[..., c] = col
        return out


@dataclass(frozen=True)
class OptimizationReport:
    """Outcome of one seeded search."""

    best_value: float
    best_params: np.ndarray
    samples_used: int
    converged: bool
    trace: list[tuple[int, float]] = field(repr=False)
    seed: int


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator keyed by the low 64 bits of ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))


def derive_seed(seed: int, index: int) -> int:
    """Stable 64-bit per-index stream seed (splitmix64 mix of seed and index)."""
    mask = (1 << 64) - 1
    z = (int(seed) + (index + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def sample_point(space: SearchSpace, rng: np.random.Generator) -> np.ndarray:
    """One parameter vector, Haar-uniform in the angular coordinates."""
    return space.transform(rng.random(space.n_params))


def sample_batch(space: SearchSpace, rng: np.random.Generator, n: int) -> np.ndarray:
    """n parameter vectors drawn as one (n, d) block from the stream."""
    return space.transform(rng.random((n, space.n_params)))


class WpEvaluator:
    """Vectorized w_p for batches of parameter vectors, maximized over the
    two measurement outcomes.

    Uses the identity w_p = (E0 - h) M00 + (E0 + h) M11, where M is the
    unnormalized post-measurement battery operator and E0 = h*k is the
    initial battery energy, so no branch ever divides by its probability.
    Agrees with protocol.best_outcome to floating-point accuracy.
    """

    def __init__(self, space: SearchSpace, spec: HamiltonianSpec):
        self.space = space
        self.spec = spec
        values, vectors = joint_eig(spec)
        self._freqs = values
        self._v = vectors
        self._vh = vectors.conj().T
        self._p0 = (1.0 + space.k) / 2.0
        self._p1 = (1.0 - space.k) / 2.0
        # battery marginal is diag(p0, p1) in both families
        self._e0 = spec.h * space.k

    def __call__(self, params) -> np.ndarray:
        p = np.atleast_2d(np.asarray(params, dtype=float))
        if p.shape[1] != self.space.n_params:
            raise ConfigError(f"expected {self.space.n_params} parameters, got {p.shape[1]}")
        if self.space.family == SEPARABLE:
            return self._separable(p)
        return self._entangled(p)

    def _measurement_kets(self, theta, phi):
        half = theta / 2.0
        w = np.exp(-1j * phi)
        k0 = np.stack([np.cos(half) + 0j, w * np.sin(half)], axis=-1)
        k1 = np.stack([np.sin(half) + 0j, -w * np.cos(half)], axis=-1)
        return k0, k1

    def _phases(self, t):
        return np.exp(-1j * np.multiply.outer(t, self._freqs))

    def _score(self, diag0, diag1):
        h, e0 = self.spec.h, self._e0
        return (e0 - h) * diag0 + (e0 + h) * diag1

    def _separable(self, p):
        r, th_a, ph_a, t, th_m, ph_m = p.T
        n = p.shape[0]
        z = r * np.cos(th_a)
        xy = r * np.sin(th_a) * np.exp(-1j * ph_a)
        aux = np.empty((n, 2, 2), dtype=complex)
        aux[:, 0, 0] = (1.0 + z) / 2.0
        aux[:, 1, 1] = (1.0 - z) / 2.0
        aux[:, 0, 1] = xy / 2.0
        aux[:, 1, 0] = np.conj(xy) / 2.0

        rho0 = np.zeros((n, 4, 4), dtype=complex)
        rho0[:, :2, :2] = self._p0 * aux
        rho0[:, 2:, 2:] = self._p1 * aux

        u = (self._v[None, :, :] * self._phases(t)[:, None, :]) @ self._vh
        rho_t = u @ rho0 @ u.conj().transpose(0, 2, 1)
        blocks = rho_t.reshape(n, 2, 2, 2, 2)

        best = np.full(n, -np.inf)
        for chi in self._measurement_kets(th_m, ph_m):
            diag = np.einsum("na,niaib,nb->ni", chi.conj(), blocks, chi).real
            np.maximum(best, self._score(diag[:, 0], diag[:, 1]), out=best)
        return best

    def _entangled(self, p):
        th_s, ph_s, t, th_m, ph_m = p.T
        n = p.shape[0]
        half = th_s / 2.0
        w = np.exp(-1j * ph_s)
        a, b = math.sqrt(self._p0), math.sqrt(self._p1)
        psi0 = np.empty((n, 4), dtype=complex)
        psi0[:, 0] = a * np.cos(half)
        psi0[:, 1] = a * w * np.sin(half)
        psi0[:, 2] = b * np.sin(half)
        psi0[:, 3] = -b * w * np.cos(half)

        psi_t = ((psi0 @ self._vh.T) * self._phases(t)) @ self._v.T
        split = psi_t.reshape(n, 2, 2)

        best = np.full(n, -np.inf)
        for chi in self._measurement_kets(th_m, ph_m):
            amps = np.einsum("na,nia->ni", chi.conj(), split)
            weights = np.abs(amps) ** 2
            np.maximum(best, self._score(weights[:, 0], weights[:, 1]), out=best)
        return best


def optimize(
    space: SearchSpace, spec: HamiltonianSpec, budget: int, seed: int
) -> OptimizationReport:
    """Maximize w_p over the search space with a fixed evaluation budget.

    Exploration scans Haar-uniform samples; refinement then runs golden-
    section line searches coordinate by coordinate around each leaderboard
    candidate, shrinking the bracket every cycle, until its budget share is
    spent or the polish stops paying. ``converged`` reports whether the
    trailing ceil(budget/5) exploration samples still moved the running
    best by 1e-2 * h or more (refinement probes are not samples).
    """
    if budget < 1:
        raise ConfigError(f"budget must be at least 1, got {budget}")
    evaluator = WpEvaluator(space, spec)
    rng = make_rng(seed)
    lo, hi = space.bounds()

    best = -math.inf
    best_x: np.ndarray | None = None
    trace: list[tuple[int, float]] = []
    used = 0
    leaders: list[tuple[float, np.ndarray]] = []  # well-separated top points, best first

    n_explore = max(1, (4 * budget) // 5)
    remaining = n_explore
    while remaining > 0:
        pts = sample_batch(space, rng, SAMPLE_CHUNK)
        m = min(SAMPLE_CHUNK, remaining)
        vals = evaluator(pts[:m])
        cummax = np.maximum.accumulate(vals)
        previous = np.concatenate(([best], cummax[:-1]))
        for j in np.flatnonzero(vals > np.maximum(previous, best)):
            best = float(vals[j])
            best_x = pts[j].copy()
            trace.append((used + j + 1, best))
        _update_leaderboard(leaders, pts[:m], vals, hi - lo)
        used += m
        remaining -= m

    explore_best = best
    refine_cap = budget - n_explore
    refine_used = 0
    if best_x is not None and refine_cap > 2:

        def line_fn(coord, base):
            def fn(v):
                nonlocal refine_used, best, best_x
                y = base.copy()
                y[coord] = v
                val = float(evaluator(y)[0])
                refine_used += 1
                if val > best:
                    best = val
                    best_x = y.copy()
                    trace.append((used + refine_used, best))
                return val

            return fn

        # polish several well-separated incumbents; single-start coordinate
        # descent can stall on a ridge between coupled coordinates
        starts = leaders or [(best, best_x)]
        per_start = max(refine_cap // len(starts), 2)
        for local_best, start in starts:
            start_cap = min(per_start, refine_cap - refine_used)
            if start_cap < 2:
                break
            start_used = 0
            x = start.copy()
            width = 0.125 * (hi - lo)
            for _ in range(_MAX_REFINE_CYCLES):
                cycle_start = local_best
                for c in range(space.n_params):
                    cap = start_cap - start_used
                    if cap < 2:
                        break
                    a = max(lo[c], x[c] - width[c])
                    b = min(hi[c], x[c] + width[c])
                    if b - a <= 0.0:
                        continue
                    line = _golden_max(line_fn(c, x), a, b, 1e-6 * (hi[c] - lo[c]), cap)
                    if line is None:
                        continue
                    x_line, f_line, n_line = line
                    start_used += n_line
                    if f_line > local_best:
                        local_best = f_line
                        x[c] = x_line
                width *= 0.6
                if local_best - cycle_start < 1e-12 or start_cap - start_used < 2:
                    break

    samples_used = used + refine_used
    # convergence is judged on the random-sampling phase: did the trailing
    # ceil(budget/5) Haar samples still move the running best by >= 1e-2 h?
    window = math.ceil(budget / 5)
    baseline = _running_best_at(trace, max(n_explore - window, 1))
    converged = (explore_best - baseline) < CONVERGENCE_WINDOW_TOL * spec.h
    return OptimizationReport(best, best_x, samples_used, converged, trace, seed)


_LEADERBOARD_SIZE = 8
_LEADERBOARD_SEPARATION = 0.08  # of each coordinate's span, Chebyshev


def _update_leaderboard(leaders, pts, vals, span):
    """Keep the best few points that are mutually separated in the box."""
    for j in np.argsort(vals)[::-1][: 4 * _LEADERBOARD_SIZE]:
        value = float(vals[j])
        if len(leaders) == _LEADERBOARD_SIZE and value <= leaders[-1][0]:
            break
        point = pts[j]
        near = None
        for i, (_, kept) in enumerate(leaders):
            if np.max(np.abs(point - kept) / span) < _LEADERBOARD_SEPARATION:
                near = i
                break
        if near is None:
            leaders.append((value, point.copy()))
        elif value > leaders[near][0]:
            leaders[near] = (value, point.copy())
        else:
            continue
        leaders.sort(key=lambda pair: -pair[0])
        del leaders[_LEADERBOARD_SIZE:]


def _running_best_at(trace, index):
    value = -math.inf
    for i, v in trace:
        if i > index:
            break
        value = v
    return value


def _golden_max(fn, lo, hi, tol, max_evals):
    """Golden-section maximum of fn on [lo, hi]; returns (x, f(x), evals)."""
    if max_evals < 2 or hi - lo <= tol:
        return None
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    evals = 2
    x_best, f_best = (x1, f1) if f1 >= f2 else (x2, f2)
    while hi - lo > tol and evals < max_evals:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = fn(x2)
            if f2 > f_best:
                x_best, f_best = x2, f2
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = fn(x1)
            if f1 > f_best:
                x_best, f_best = x1, f1
        evals += 1
    return x_best, f_best, evals
