"""Point-set generation and separation.

Generators: Fibonacci spiral on S^2, Kronecker sequences on T^d, greedy
farthest-point sampling on any manifold, plus Riemannian gradient descent
on the Riesz energy as a refiner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import energy as _energy
from .errors import DomainError, InputError
from .manifold import FlatTorus, Manifold, Point, Sphere
from .parallel import chunk_ranges
from .rng import stream

GOLDEN_RATIO_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0


class PointSet:
    """An ordered finite subset of a manifold.

    Coordinates are stored as an immutable (N, ambient_dim) array; the
    provenance dict records how the set was produced (generator, seed,
    parameters) and travels into every report.
    """

    def __init__(self, manifold: Manifold, coords, provenance: dict | None = None):
        arr = np.array(coords, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != manifold.ambient_dim:
            raise InputError(
                f"coordinates must have shape (n, {manifold.ambient_dim}), got {arr.shape}")
        if arr.shape[0] < 1:
            raise InputError("a point set needs at least one point")
        if not np.all(np.isfinite(arr)):
            raise InputError("non-finite coordinates")
        arr = manifold._normalize_rows(arr)
        arr.setflags(write=False)
        self.manifold = manifold
        self.coords = arr
        self.provenance = dict(provenance or {})

    @classmethod
    def _trusted(cls, manifold: Manifold, coords: np.ndarray, provenance: dict | None = None):
        """Wrap coordinates that are already on the manifold (generator or
        exp-map output) without renormalizing, so bits are preserved."""
        obj = cls.__new__(cls)
        arr = np.array(coords, dtype=float)
        arr.setflags(write=False)
        obj.manifold = manifold
        obj.coords = arr
        obj.provenance = dict(provenance or {})
        return obj

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def point(self, i: int) -> Point:
        return Point(self.coords[i].copy())

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"PointSet({self.manifold!r}, n={self.n})"


@dataclass
class SeparationReport:
    """Minimum pairwise geodesic distance of a point set."""

    n: int
    min_distance: float
    pair: tuple
    gamma_hat: float          # min_distance * N^(1/d)
    has_duplicates: bool
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "min_distance": self.min_distance,
            "pair": list(self.pair),
            "gamma_hat": self.gamma_hat,
            "has_duplicates": self.has_duplicates,
            "provenance": self.provenance,
        }


def _brute_min(X: PointSet):
    coords = X.coords
    n = len(coords)
    best = math.inf
    best_pair = (-1, -1)
    for lo, hi in chunk_ranges(n, 512):
        D = X.manifold.pairwise_block(coords[lo:hi], coords)
        rows = np.arange(lo, hi)[:, None]
        upper = np.arange(n)[None, :] > rows
        masked = np.where(upper, D, math.inf)
        k = int(np.argmin(masked))
        i, j = divmod(k, n)
        d = float(masked[i, j])
        i += lo
        if d < best or (d == best and (i, j) < best_pair):
            best, best_pair = d, (i, j)
    return best, best_pair


def _grid_min(X: PointSet):
    """Uniform-grid neighbor search on the torus.

    Cell edges start at the expected nearest-neighbor scale and grow until
    the candidate minimum is certified (a pair at distance <= cell edge
    always falls in adjacent cells).  Distances for candidate pairs are
    evaluated with the same elementwise expression as the brute-force
    scan, so the returned minimum is bit-identical.
    """
    m = X.manifold
    if not isinstance(m, FlatTorus):
        raise InputError("grid-accelerated separation is only available on the torus")
    coords = X.coords
    n, d = coords.shape
    edge = n ** (-1.0 / d)
    while True:
        k = int(1.0 / edge)
        if k < 3:
            return _brute_min(X)
        cells = np.minimum((coords * k).astype(int), k - 1)
        buckets: dict = {}
        for idx, cell in enumerate(map(tuple, cells)):
            buckets.setdefault(cell, []).append(idx)
        offsets = np.array(np.meshgrid(*[[-1, 0, 1]] * d)).T.reshape(-1, d)
        cand_i, cand_j = [], []
        for cell, members in buckets.items():
            for off in offsets:
                other = tuple((np.array(cell) + off) % k)
                if other < cell:
                    continue
                peers = buckets.get(other)
                if peers is None:
                    continue
                if other == cell:
                    for a in range(len(members)):
                        for b in range(a + 1, len(members)):
                            i, j = members[a], members[b]
                            cand_i.append(min(i, j))
                            cand_j.append(max(i, j))
                else:
                    for i in members:
                        for j in peers:
                            cand_i.append(min(i, j))
                            cand_j.append(max(i, j))
        if cand_i:
            ii = np.array(cand_i)
            jj = np.array(cand_j)
            delta = m._wrap_delta(coords[ii] - coords[jj])
            dist = np.sqrt(np.sum(delta * delta, axis=1))
            best = float(dist.min())
            if best <= edge:
                hits = np.flatnonzero(dist == best)
                pairs = sorted((int(ii[h]), int(jj[h])) for h in hits)
                return best, pairs[0]
        edge *= 2.0
        if edge > m.diameter:
            return _brute_min(X)


def min_geodesic_distance(X: PointSet, method: str = "brute") -> SeparationReport:
    """Exact minimum over all pairs, with gamma_hat = min * N^(1/d).

    method "grid" uses the torus neighbor-grid accelerator (bit-identical
    result); "brute" scans all pairs.  Duplicate points yield a zero
    minimum with the has_duplicates flag set.
    """
    if X.n < 2:
        raise InputError("separation needs at least 2 points")
    if method == "brute":
        best, pair = _brute_min(X)
    elif method == "grid":
        best, pair = _grid_min(X)
    else:
        raise InputError(f"unknown separation method {method!r}")
    d = X.manifold.dim
    return SeparationReport(
        n=X.n,
        min_distance=best,
        pair=pair,
        gamma_hat=best * X.n ** (1.0 / d),
        has_duplicates=bool(best == 0.0),
        provenance=dict(X.provenance),
    )


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------

def fibonacci_sphere(n: int) -> PointSet:
    """Spiral lattice on S^2: z_k = 1 - (2k+1)/n, longitude stepped by the
    golden-ratio conjugate."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    m = Sphere(2)
    k = np.arange(n)
    z = 1.0 - (2.0 * k + 1.0) / n
    phi = 2.0 * math.pi * k * GOLDEN_RATIO_CONJUGATE
    rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    coords = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    return PointSet(m, coords, provenance={"generator": "fibonacci", "n": int(n)})


def kronecker_alphas(d: int) -> np.ndarray:
    """Fractional parts of 2^(1/(i+1)) for i = 1..d; fixed for
    reproducibility."""
    return np.array([2.0 ** (1.0 / (i + 1)) % 1.0 for i in range(1, d + 1)])


def kronecker_torus(d: int, n: int) -> PointSet:
    """Kronecker sequence x_k = k * alpha mod 1 on T^d with badly
    approximable irrational steps."""
    if d < 1:
        raise InputError(f"d must be >= 1, got {d}")
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    m = FlatTorus(d)
    coords = (np.arange(n)[:, None] * kronecker_alphas(d)[None, :]) % 1.0
    return PointSet(m, coords, provenance={"generator": "kronecker", "d": int(d), "n": int(n)})


def farthest_point_sample(m: Manifold, n: int, seed: int, candidate_pool: int | None = None) -> PointSet:
    """Greedy maximin selection from a seeded uniform candidate pool.

    Starts at a seeded uniform point, then repeatedly adds the candidate
    farthest from the current set.  The pool must hold at least 10 * n
    candidates.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if candidate_pool is None:
        candidate_pool = max(10 * n, 1024)
    if candidate_pool < 10 * n:
        raise InputError(f"candidate pool {candidate_pool} too small, need >= {10 * n}")
    rng = stream(seed, "farthest-point-sample")
    start = m._sample(rng, 1)[0]
    chosen = [start]
    if n > 1:
        pool = m._sample(rng, candidate_pool)
        best = m.distances_from(start, pool)
        for _ in range(n - 1):
            pick = int(np.argmax(best))
            chosen.append(pool[pick].copy())
            best = np.minimum(best, m.distances_from(pool[pick], pool))
    return PointSet(m, np.array(chosen), provenance={
        "generator": "farthest-point",
        "seed": int(seed),
        "n": int(n),
        "candidate_pool": int(candidate_pool),
    })


# ----------------------------------------------------------------------
# Riesz energy descent
# ----------------------------------------------------------------------

class _CoordsView:
    """Duck-typed stand-in for PointSet inside the descent loop: the
    proposals come straight from exp_array, so re-validation per line
    search step would only cost time."""

    __slots__ = ("manifold", "coords", "n")

    def __init__(self, manifold, coords):
        self.manifold = manifold
        self.coords = coords
        self.n = len(coords)


def _energy_or_inf(X, s: float) -> float:
    try:
        return _energy.discrete_energy(X, s)
    except DomainError:
        return math.inf


def minimize_riesz_energy(X0: PointSet, s: float, max_iters: int = 500,
                          tol: float = 1e-12) -> PointSet:
    """Riemannian gradient descent on the discrete Riesz energy.

    Each iteration line-searches two candidate directions: the full
    (sub)gradient, and a smoothed one with near-cut-locus pairs dropped.
    The second candidate matters when pairs sit at the cut locus, where
    the distance function has a corner and the raw pull can block every
    joint step.  Steps start at 0.1 * N^(-1/d) and halve until the energy
    decreases (at most 60 halvings); the better candidate wins.

    Stops when the relative energy decrease falls below tol, after
    max_iters iterations, or when no candidate improves (flagged in the
    provenance).  The energy trace of accepted iterates is recorded.
    """
    _energy.check_exponent(s, X0.manifold.dim)
    m = X0.manifold
    sep = min_geodesic_distance(X0, "brute") if X0.n >= 2 else None
    if sep is not None and sep.has_duplicates:
        raise InputError(f"initial set has coincident points at indices {sep.pair}")
    n, d = X0.n, m.dim
    current = _CoordsView(m, np.array(X0.coords))
    energy_now = _energy.discrete_energy(current, s) if n >= 2 else 0.0
    trace = [energy_now]
    eta0 = 0.1 * n ** (-1.0 / d)
    converged = False
    line_search_failed = False
    iters_done = 0
    for _ in range(max_iters):
        if n < 2:
            converged = True
            break
        best_prop, best_e = None, energy_now
        for margin in (1e-12, 1e-2):
            grad = _energy.energy_gradient(current, s, cut_margin=margin)
            if not np.any(grad):
                converged = True
                continue
            eta = eta0
            for _ in range(60):
                prop = _CoordsView(m, m.exp_array(current.coords, -eta * grad))
                e_prop = _energy_or_inf(prop, s)
                if e_prop < energy_now:
                    if e_prop < best_e:
                        best_prop, best_e = prop, e_prop
                    break
                eta /= 2.0
        if best_prop is None:
            line_search_failed = not converged
            break
        converged = False
        iters_done += 1
        rel_drop = (energy_now - best_e) / abs(energy_now) if energy_now else 0.0
        current, energy_now = best_prop, best_e
        trace.append(energy_now)
        if rel_drop < tol:
            converged = True
            break
    prov = dict(X0.provenance)
    prov.update({
        "generator": "riesz-descent",
        "base_generator": X0.provenance.get("generator"),
        "s": float(s),
        "iterations": iters_done,
        "converged": bool(converged),
        "line_search_failed": bool(line_search_failed),
        "energy_trace": [float(e) for e in trace],
    })
    return PointSet._trusted(m, current.coords, prov)
