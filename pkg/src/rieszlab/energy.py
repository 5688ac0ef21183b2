"""Riesz kernel, discrete and continuous energies, mean potentials.

The continuous energy is reduced to a one-dimensional radial integral,
which is exact on the homogeneous manifolds handled here.  All pairwise
sums use compensated summation over fixed-size row chunks so that serial
and multi-threaded runs agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import DomainError, InputError
from .manifold import SQRT2_2, SQRT3_2, FlatTorus, Manifold, ManifoldKind, Point, Sphere
from .parallel import chunk_ranges, map_ordered

# Fixed row-chunk size for pairwise reductions.  Chunk boundaries (and
# therefore rounding) must not depend on the thread count.
CHUNK_ROWS = 256

DEFAULT_QUAD_TOL = 1e-10


def check_exponent(s: float, d: int) -> None:
    """The Riesz exponent must satisfy 0 < s < d (the energy integral
    diverges otherwise)."""
    if not (0.0 < s < d):
        raise DomainError(f"Riesz exponent must satisfy 0 < s < d={d}, got s={s}")


def riesz_kernel(r, s: float):
    """Riesz kernel r^(-s) for r > 0."""
    if s <= 0:
        raise DomainError(f"kernel exponent must be positive, got {s}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("Riesz kernel requires a positive distance (coincident points?)")
    out = arr ** (-s)
    return float(out) if arr.ndim == 0 else out


def compensated_sum(values) -> float:
    """Kahan summation in index order."""
    total = 0.0
    carry = 0.0
    for v in values:
        y = float(v) - carry
        t = total + y
        carry = (t - total) - y
        total = t
    return total


def _chunk_pair_sum(X, s, lo, hi):
    """Kernel sum over ordered pairs (i, j) with lo <= i < hi < ... j > i.

    Row sums are formed by numpy's deterministic reduction; the rows of a
    chunk are then combined with compensated summation.
    """
    coords = X.coords
    n = len(coords)
    D = X.manifold.pairwise_block(coords[lo:hi], coords)
    cols = np.arange(n)[None, :]
    rows = np.arange(lo, hi)[:, None]
    upper = cols > rows
    bad = upper & (D <= 0.0)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DomainError(f"coincident points at indices {lo + int(i)} and {int(j)}")
    safe = np.where(upper, D, 1.0)
    kernel = np.where(upper, safe ** (-s), 0.0)
    return compensated_sum(kernel.sum(axis=1))


def discrete_energy(X, s: float, threads=None) -> float:
    """Normalized Riesz s-energy of a point set: the kernel averaged over
    ordered distinct pairs with a 1/N^2 weight.

    Pairs are enumerated once utilizing symmetry; the reduction is
    bit-identical for any thread count.  Coincident points raise a
    DomainError naming the offending indices.
    """
    check_exponent(s, X.manifold.dim)
    n = X.n
    if n < 2:
        return 0.0
    chunks = chunk_ranges(n, CHUNK_ROWS)
    partials = map_ordered(lambda rng: _chunk_pair_sum(X, s, *rng), chunks, threads)
    return 2.0 * compensated_sum(partials) / (n * n)


def punctured_mean_potential(X, i: int, s: float) -> float:
    """Mean kernel value at point i against the rest of the set, with the
    1/N normalization (not 1/(N-1))."""
    check_exponent(s, X.manifold.dim)
    n = X.n
    if not (0 <= i < n):
        raise InputError(f"index {i} out of range for a set of {n} points")
    if n == 1:
        return 0.0
    d = X.manifold.distances_from(X.coords[i], X.coords)
    others = np.delete(np.arange(n), i)
    d = d[others]
    zero = d <= 0.0
    if np.any(zero):
        raise DomainError(f"coincident points at indices {i} and {int(others[np.argmax(zero)])}")
    return float(np.sum(d ** (-s)) / n)


def energy_via_distance_cdf(X, s: float) -> float:
    """Discrete energy recomputed from the distribution of pairwise
    distances: sort all N(N-1)/2 distances, group equal values, and take
    the jump-weighted kernel sum.

    Algebraically identical to discrete_energy; serves as a cross-check
    of the distance-distribution representation of the energy.
    """
    check_exponent(s, X.manifold.dim)
    n = X.n
    if n < 2:
        return 0.0
    dists = pairwise_distances(X)
    if np.any(dists <= 0.0):
        raise DomainError("coincident points in the set")
    radii, counts = np.unique(np.sort(dists), return_counts=True)
    return 2.0 * compensated_sum(radii ** (-s) * counts) / (n * n)


def pairwise_distances(X) -> np.ndarray:
    """All N(N-1)/2 pairwise geodesic distances (upper triangle, row-major)."""
    coords = X.coords
    n = len(coords)
    blocks = []
    for lo, hi in chunk_ranges(n, CHUNK_ROWS):
        D = X.manifold.pairwise_block(coords[lo:hi], coords)
        for row in range(lo, hi):
            blocks.append(D[row - lo, row + 1:])
    return np.concatenate(blocks) if blocks else np.empty(0)


# ----------------------------------------------------------------------
# continuous (radial) integrals
# ----------------------------------------------------------------------

def _sphere_radial(m: Sphere, s: float, upper: float, tol: float) -> float:
    """(1/Z_d) * integral of t^(-s) sin^(d-1) t over (0, upper).

    The substitution t = u^(1/(d-s)) flattens the endpoint singularity:
    the transformed integrand is p * (sin t / t)^(d-1), smooth on the
    whole range.
    """
    d = m.dim
    p = 1.0 / (d - s)

    def integrand(u):
        if u <= 0.0:
            return p
        t = u ** p
        return p * (math.sin(t) / t) ** (d - 1)

    top = upper ** (d - s)
    val, _ = integrate.quad(integrand, 0.0, top, epsabs=tol, epsrel=1e-13, limit=200)
    return val / m.zonal_normalization()


def _torus_radial(m: FlatTorus, s: float, tol: float) -> float:
    """Integral of r^(-s) against the radial ball-volume density on T^d."""
    d = m.dim
    # r <= 1/2: volume density is the Euclidean one, d*c_d*r^(d-1); exact.
    c_d = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
    head = d * c_d * 0.5 ** (d - s) / (d - s)
    if d == 1:
        return head
    if d == 2:
        # density beyond 1/2: 2r(pi - 4 acos(1/(2r))), the arc length of
        # the distance circle inside the fundamental square
        tail, _ = integrate.quad(
            lambda r: r ** (-s) * 2.0 * r * (math.pi - 4.0 * math.acos(0.5 / r)),
            0.5, SQRT2_2, epsabs=tol / 2, epsrel=1e-13)
        return head + tail
    if d == 3:
        # (1/2, sqrt2/2]: density 6 pi r - 8 pi r^2 (sphere minus face caps)
        def anti(r):
            return 6.0 * math.pi * r ** (2 - s) / (2 - s) - 8.0 * math.pi * r ** (3 - s) / (3 - s)

        mid = anti(SQRT2_2) - anti(0.5)
        # (sqrt2/2, sqrt3/2]: integrate by parts against the exact volume,
        # which carries a 1-D quadrature for the edge overlaps
        v_lo = float(m.ball_volume(SQRT2_2))
        diam = SQRT3_2
        boundary = diam ** (-s) * 1.0 - SQRT2_2 ** (-s) * v_lo
        inner, _ = integrate.quad(
            lambda r: r ** (-s - 1) * float(m.ball_volume(r)),
            SQRT2_2, diam, epsabs=tol / 2, epsrel=1e-12, limit=100)
        return head + mid + boundary + s * inner
    raise InputError(f"continuous energy on the torus is only supported for d <= 3 (d={d})")


def continuous_energy(m: Manifold, s: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Energy of the normalized volume measure: the double integral of the
    kernel, reduced to a radial integral (exact under homogeneity).

    Absolute quadrature tolerance tol; raises DomainError for s outside
    (0, d).
    """
    check_exponent(s, m.dim)
    if isinstance(m, Sphere):
        return _sphere_radial(m, s, math.pi, tol)
    if isinstance(m, FlatTorus):
        return _torus_radial(m, s, tol)
    raise InputError(f"unsupported manifold {m!r}")


def mean_potential(m: Manifold, x: Point, s: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Mean kernel value at x against the normalized volume measure.

    Position-independent on the homogeneous manifolds implemented here;
    the point is validated and the radial reduction is shared with
    continuous_energy.
    """
    m.point(x.coords)  # validates dimension / finiteness
    return continuous_energy(m, s, tol)


def small_ball_energy(m: Manifold, s: float, r: float, tol: float = DEFAULT_QUAD_TOL) -> float:
    """Integral of t^(-s) against the radial volume density over (0, r).

    Supported for radii below the injectivity radius (where the torus
    density is exactly Euclidean)."""
    check_exponent(s, m.dim)
    if not (0.0 < r):
        raise InputError(f"radius must be positive, got {r}")
    if isinstance(m, Sphere):
        return _sphere_radial(m, s, min(r, math.pi), tol)
    if isinstance(m, FlatTorus):
        if r > 0.5:
            raise InputError("torus small-ball energy requires r <= 1/2")
        d = m.dim
        c_d = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return d * c_d * r ** (d - s) / (d - s)
    raise InputError(f"unsupported manifold {m!r}")


# ----------------------------------------------------------------------
# gradient of the discrete energy
# ----------------------------------------------------------------------

def energy_gradient(X, s: float, cut_margin: float = 1e-12) -> np.ndarray:
    """Riemannian gradient of discrete_energy with respect to each point,
    as an (N, ambient_dim) array of tangent components.

    Pairs at the cut locus (distance within cut_margin * injectivity
    radius of the maximum reachable by the log map) contribute zero: the
    kernel term attains its pairwise minimum there, so zero is a valid
    subgradient choice.
    """
    check_exponent(s, X.manifold.dim)
    m = X.manifold
    coords = X.coords
    n = len(coords)
    grad = np.zeros_like(coords)
    if n < 2:
        return grad
    scale = 2.0 / (n * n)
    if isinstance(m, FlatTorus):
        cut = m.injectivity_radius * (1.0 - cut_margin)
        for lo, hi in chunk_ranges(n, CHUNK_ROWS):
            delta = m._wrap_delta(coords[None, :, :] - coords[lo:hi, None, :])
            d = np.sqrt(np.sum(delta * delta, axis=2))
            rows = np.arange(lo, hi)[:, None]
            off = np.arange(n)[None, :] != rows
            if np.any(off & (d <= 0.0)):
                raise DomainError("coincident points in the set")
            live = off & (np.abs(delta) < cut).all(axis=2)
            w = np.where(live, np.where(live, d, 1.0) ** (-s - 2.0), 0.0)
            grad[lo:hi] = scale * s * np.einsum("ij,ijk->ik", w, delta)
        return grad
    # sphere: log_x(y) = theta * u / |u| with u = y - (x.y) x
    cut = m.injectivity_radius * (1.0 - cut_margin)
    for lo, hi in chunk_ranges(n, CHUNK_ROWS):
        dots = np.clip(coords[lo:hi] @ coords.T, -1.0, 1.0)
        theta = np.arccos(dots)
        rows = np.arange(lo, hi)[:, None]
        off = np.arange(n)[None, :] != rows
        if np.any(off & (theta <= 0.0)):
            raise DomainError("coincident points in the set")
        u = coords[None, :, :] - dots[:, :, None] * coords[lo:hi, None, :]
        norms = np.linalg.norm(u, axis=2)
        live = off & (theta < cut) & (norms > 0.0)
        w = np.where(live, np.where(live, theta, 1.0) ** (-s - 1.0), 0.0)
        w = w / np.where(norms > 0.0, norms, 1.0)
        grad[lo:hi] = scale * s * np.einsum("ij,ijk->ik", w, u)
    # numerical tangency
    grad -= np.sum(grad * coords, axis=1, keepdims=True) * coords
    return grad


# ----------------------------------------------------------------------
# reporting
# ----------------------------------------------------------------------

@dataclass
class EnergyReport:
    """Discrete vs continuous energy of one point set."""

    n: int
    s: float
    energy_discrete: float
    energy_continuous: float
    gap: float
    quad_tol: float
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "s": self.s,
            "energy_discrete": self.energy_discrete,
            "energy_continuous": self.energy_continuous,
            "gap": self.gap,
            "quad_tol": self.quad_tol,
            "provenance": self.provenance,
        }


def energy_report(X, s: float, tol: float = DEFAULT_QUAD_TOL, threads=None) -> EnergyReport:
    e_x = discrete_energy(X, s, threads=threads)
    e_m = continuous_energy(X.manifold, s, tol)
    return EnergyReport(
        n=X.n,
        s=float(s),
        energy_discrete=e_x,
        energy_continuous=e_m,
        gap=abs(e_x - e_m),
        quad_tol=float(tol),
        provenance=dict(X.provenance),
    )
