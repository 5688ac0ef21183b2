"""Geometry of the supported manifolds: unit spheres S^d and flat tori T^d.

Both manifolds are homogeneous, so the normalized volume of a geodesic
ball depends on the radius only.  Sphere points are unit vectors in
R^(d+1); torus points live in the half-open cube [0, 1)^d with the
nearest-image (wrapped) metric.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, special

from .errors import DomainError, InputError
from .rng import stream

SQRT2_2 = math.sqrt(2.0) / 2.0
SQRT3_2 = math.sqrt(3.0) / 2.0


class ManifoldKind(str, Enum):
    SPHERE = "sphere"
    FLAT_TORUS = "flat-torus"


@dataclass(frozen=True, eq=False)
class Point:
    """A validated point; construct through Manifold.point()."""

    coords: np.ndarray


@dataclass(frozen=True, eq=False)
class TangentVector:
    """A tangent vector at a base point; construct through Manifold.tangent()."""

    base: Point
    components: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def _as_vector(coords, ambient_dim: int, what: str) -> np.ndarray:
    arr = np.asarray(coords, dtype=float)
    if arr.ndim == 0 and ambient_dim == 1:
        arr = arr.reshape(1)
    if arr.shape != (ambient_dim,):
        raise InputError(f"{what} must have shape ({ambient_dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{what} has non-finite coordinates")
    return arr


class Manifold(ABC):
    """Compact connected Riemannian manifold with closed-form geometry.

    Instances are immutable; every operation is pure and thread-safe.
    """

    kind: ManifoldKind

    def __init__(self, dim: int):
        if dim < 1:
            raise InputError(f"dimension must be >= 1, got {dim}")
        self._dim = int(dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    @abstractmethod
    def ambient_dim(self) -> int:
        """Length of a coordinate vector."""

    @property
    @abstractmethod
    def diameter(self) -> float:
        """Maximum geodesic distance between two points."""

    @property
    @abstractmethod
    def injectivity_radius(self) -> float:
        """Largest radius below which geodesics are uniquely minimizing."""

    @property
    @abstractmethod
    def total_volume(self) -> float:
        """Unnormalized Riemannian volume of the whole manifold."""

    # -- point / tangent construction -------------------------------------

    def point(self, coords) -> Point:
        """Validate (and normalize / wrap) raw coordinates into a Point."""
        return Point(self._normalize(_as_vector(coords, self.ambient_dim, "point")))

    def tangent(self, base: Point, components) -> TangentVector:
        comp = _as_vector(components, self.ambient_dim, "tangent vector")
        return TangentVector(base, self._project_tangent(base.coords, comp))

    def origin(self) -> Point:
        """A fixed reference point (pole of the sphere, corner of the torus)."""
        c = np.zeros(self.ambient_dim)
        if self.kind is ManifoldKind.SPHERE:
            c[0] = 1.0
        return Point(c)

    # -- geometry ----------------------------------------------------------

    def distance(self, x: Point, y: Point) -> float:
        return float(self.distances_from(x.coords, y.coords[None, :])[0])

    def exp(self, v: TangentVector) -> Point:
        out = self.exp_array(v.base.coords[None, :], v.components[None, :])[0]
        return Point(out)

    def log(self, x: Point, y: Point) -> TangentVector:
        d = self.distance(x, y)
        if d >= self.injectivity_radius:
            raise DomainError(
                f"log map undefined: dist {d:.6g} reaches the cut locus "
                f"(injectivity radius {self.injectivity_radius:.6g})"
            )
        return TangentVector(x, self._log_array(x.coords, y.coords[None, :])[0])

    def sample(self, seed: int, n: int) -> np.ndarray:
        """n i.i.d. points from the normalized volume measure, as an
        (n, ambient_dim) array; deterministic given the seed."""
        if n < 1:
            raise InputError(f"sample size must be >= 1, got {n}")
        return self._sample(stream(seed, "sample-uniform"), n)

    def ball_volume(self, r):
        """Normalized volume of a closed geodesic ball of radius r.

        Accepts a scalar or an array.  Exactly 1 for r >= diameter;
        negative radii raise.
        """
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise InputError("ball radius must be >= 0")
        flat = np.atleast_1d(arr).ravel()
        out = np.ones_like(flat)
        inside = flat < self.diameter
        if np.any(inside):
            out[inside] = self._ball_volume(flat[inside])
        out = out.reshape(arr.shape)
        return float(out) if arr.ndim == 0 else out

    # -- array-level kernels (hot paths) -----------------------------------

    @abstractmethod
    def distances_from(self, y: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Geodesic distances from a single point y to each row of coords."""

    @abstractmethod
    def pairwise_block(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """(len(a), len(b)) matrix of geodesic distances."""

    @abstractmethod
    def exp_array(self, base: np.ndarray, vec: np.ndarray) -> np.ndarray:
        """Row-wise exponential map."""

    @abstractmethod
    def _log_array(self, x: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Log map from a single x to each row of ys (no cut-locus check)."""

    @abstractmethod
    def _project_tangent(self, base: np.ndarray, vec: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _normalize(self, coords: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _normalize_rows(self, coords: np.ndarray) -> np.ndarray:
        """Vectorized _normalize over the rows of an (n, ambient_dim) array."""

    @abstractmethod
    def _sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        ...

    @abstractmethod
    def _ball_volume(self, r: np.ndarray) -> np.ndarray:
        """Ball volume on a 1-D array of radii, all strictly below the
        diameter."""

    def describe(self) -> dict:
        return {"kind": self.kind.value, "dim": self.dim}

    def __repr__(self):
        return f"{type(self).__name__}({self.dim})"

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim

    def __hash__(self):
        return hash((type(self).__name__, self.dim))


class Sphere(Manifold):
    """Unit sphere S^d embedded in R^(d+1) with the great-circle metric."""

    kind = ManifoldKind.SPHERE

    def __init__(self, dim: int):
        super().__init__(dim)
        self._zonal_norm = None  # cached integral of sin^(d-1) over (0, pi)

    @property
    def ambient_dim(self) -> int:
        return self.dim + 1

    @property
    def diameter(self) -> float:
        return math.pi

    @property
    def injectivity_radius(self) -> float:
        return math.pi

    @property
    def total_volume(self) -> float:
        d = self.dim
        return 2.0 * math.pi ** ((d + 1) / 2.0) / special.gamma((d + 1) / 2.0)

    def zonal_normalization(self) -> float:
        """Integral of sin^(d-1) t over (0, pi)."""
        if self._zonal_norm is None:
            d = self.dim
            self._zonal_norm = math.sqrt(math.pi) * special.gamma(d / 2.0) / special.gamma((d + 1) / 2.0)
        return self._zonal_norm

    def _normalize(self, coords):
        norm = np.linalg.norm(coords)
        if norm == 0.0:
            raise InputError("cannot normalize the zero vector onto the sphere")
        if abs(norm - 1.0) > 1e-6:
            raise InputError(f"sphere point norm {norm:.6g} too far from 1")
        return coords / norm

    def _normalize_rows(self, coords):
        norms = np.linalg.norm(coords, axis=1)
        if np.any(norms == 0.0) or np.any(np.abs(norms - 1.0) > 1e-6):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise InputError(f"sphere point {bad} has norm {norms[bad]:.6g}, too far from 1")
        return coords / norms[:, None]

    def _project_tangent(self, base, vec):
        return vec - np.dot(base, vec) * base

    def distances_from(self, y, coords):
        return np.arccos(np.clip(coords @ y, -1.0, 1.0))

    def pairwise_block(self, a, b):
        return np.arccos(np.clip(a @ b.T, -1.0, 1.0))

    def exp_array(self, base, vec):
        theta = np.linalg.norm(vec, axis=1)
        safe = np.where(theta > 0.0, theta, 1.0)
        moved = np.cos(theta)[:, None] * base + np.sin(theta)[:, None] * vec / safe[:, None]
        out = np.where(theta[:, None] > 0.0, moved, base)
        return out / np.linalg.norm(out, axis=1, keepdims=True)

    def _log_array(self, x, ys):
        theta = self.distances_from(x, ys)
        u = ys - (ys @ x)[:, None] * x[None, :]
        norms = np.linalg.norm(u, axis=1)
        safe = np.where(norms > 0.0, norms, 1.0)
        return theta[:, None] * u / safe[:, None]

    def _sample(self, rng, n):
        v = rng.standard_normal((n, self.ambient_dim))
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def _ball_volume(self, r):
        if self.dim == 1:
            return r / math.pi
        if self.dim == 2:
            return (1.0 - np.cos(r)) / 2.0
        z = self.zonal_normalization()
        d = self.dim
        vals = np.array([
            integrate.quad(lambda u: math.sin(u) ** (d - 1), 0.0, ri,
                           epsabs=1e-12, epsrel=1e-12)[0] / z
            for ri in r
        ])
        return np.minimum(vals, 1.0)


class FlatTorus(Manifold):
    """Flat torus T^d = [0, 1)^d with the nearest-image metric."""

    kind = ManifoldKind.FLAT_TORUS

    @property
    def ambient_dim(self) -> int:
        return self.dim

    @property
    def diameter(self) -> float:
        return math.sqrt(self.dim) / 2.0

    @property
    def injectivity_radius(self) -> float:
        return 0.5

    @property
    def total_volume(self) -> float:
        return 1.0

    def _normalize(self, coords):
        return np.mod(coords, 1.0)

    def _normalize_rows(self, coords):
        return np.mod(coords, 1.0)

    def _project_tangent(self, base, vec):
        return vec

    @staticmethod
    def _wrap_delta(delta):
        # signed nearest-image difference in [-1/2, 1/2]
        return delta - np.round(delta)

    def distances_from(self, y, coords):
        delta = self._wrap_delta(coords - y)
        return np.sqrt(np.sum(delta * delta, axis=1))

    def pairwise_block(self, a, b):
        delta = self._wrap_delta(a[:, None, :] - b[None, :, :])
        return np.sqrt(np.sum(delta * delta, axis=2))

    def exp_array(self, base, vec):
        return np.mod(base + vec, 1.0)

    def _log_array(self, x, ys):
        return self._wrap_delta(ys - x)

    def _sample(self, rng, n):
        return rng.random((n, self.dim))

    def _vol_r_le_half(self, r):
        return euclidean_ball_volume(self.dim, r)

    def _ball_volume(self, r):
        d = self.dim
        if d == 1:
            return 2.0 * r
        out = np.empty_like(r)
        small = r <= 0.5
        out[small] = self._vol_r_le_half(r[small])
        big = ~small
        if np.any(big):
            if d == 2:
                out[big] = self._t2_large(r[big])
            elif d == 3:
                out[big] = self._t3_large(r[big])
            else:
                raise InputError(
                    f"torus ball volume for r > 1/2 is only supported for d <= 3 (d={d})"
                )
        return out

    @staticmethod
    def _t2_large(r):
        # disc of radius r intersected with the centered unit square:
        # pi r^2 minus the four circular segments beyond the edges.
        # Exact for 1/2 < r <= sqrt(2)/2; corner overlaps cannot occur
        # below the diameter.
        r = np.minimum(r, SQRT2_2)
        seg = r * r * np.arccos(np.minimum(1.0, 0.5 / r)) - 0.5 * np.sqrt(
            np.maximum(0.0, r * r - 0.25))
        v = math.pi * r * r - 4.0 * seg
        return np.minimum(v, 1.0)

    @staticmethod
    def _t3_edge_integral(r):
        # volume of {|p| <= r, p_x >= 1/2, p_y >= 1/2}: the overlap of two
        # face caps, needed once adjacent caps intersect (r > sqrt(2)/2)
        top = math.sqrt(r * r - 0.25)

        def slab(x):
            rho2 = r * r - x * x
            rho = math.sqrt(rho2)
            return rho2 * math.acos(min(1.0, 0.5 / rho)) - 0.5 * math.sqrt(max(0.0, rho2 - 0.25))

        val, _ = integrate.quad(slab, 0.5, top, epsabs=1e-13, epsrel=1e-13)
        return val

    def _t3_large(self, r):
        r = np.minimum(r, SQRT3_2)
        h = r - 0.5
        cap = math.pi * h * h * (3.0 * r - h) / 3.0
        v = 4.0 * math.pi * r ** 3 / 3.0 - 6.0 * cap
        edge = r > SQRT2_2
        if np.any(edge):
            extra = np.array([12.0 * self._t3_edge_integral(ri) for ri in np.atleast_1d(r[edge])])
            v = np.array(v, copy=True)
            v[edge] += extra
        return np.minimum(v, 1.0)


# ----------------------------------------------------------------------
# functional surface
# ----------------------------------------------------------------------

def sphere(dim: int) -> Sphere:
    return Sphere(dim)


def flat_torus(dim: int) -> FlatTorus:
    return FlatTorus(dim)


def make_manifold(kind: str, dim: int) -> Manifold:
    """Build a manifold from its serialized name ("sphere" / "flat-torus",
    with "torus" accepted as an alias)."""
    normalized = kind.strip().lower()
    if normalized == ManifoldKind.SPHERE.value:
        return Sphere(dim)
    if normalized in (ManifoldKind.FLAT_TORUS.value, "torus"):
        return FlatTorus(dim)
    raise InputError(f"unknown manifold kind {kind!r}")


def geodesic_distance(m: Manifold, x: Point, y: Point) -> float:
    """Geodesic distance between two points of m."""
    return m.distance(x, y)


def ball_volume(m: Manifold, r):
    """Normalized volume of the closed geodesic ball of radius r."""
    return m.ball_volume(r)


def euclidean_ball_volume(d: int, r):
    """Volume of the Euclidean d-ball of radius r: c_d r^d."""
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise InputError("ball radius must be >= 0")
    c_d = math.pi ** (d / 2.0) / special.gamma(d / 2.0 + 1.0)
    out = c_d * arr ** d
    return float(out) if np.isscalar(r) or arr.ndim == 0 else out


def sample_uniform(m: Manifold, seed: int, n: int):
    """n i.i.d. points from the normalized volume measure, as a PointSet."""
    from .pointsets import PointSet

    coords = m.sample(seed, n)
    return PointSet(m, coords, provenance={"generator": "uniform", "seed": int(seed), "n": int(n)})


def exp_map(m: Manifold, v: TangentVector) -> Point:
    """Point reached from v.base after following the geodesic with initial
    velocity v for unit time."""
    return m.exp(v)


def log_map(m: Manifold, x: Point, y: Point) -> TangentVector:
    """Tangent vector v at x with exp_map(m, v) = y and |v| = dist(x, y).

    Raises DomainError when dist(x, y) reaches the injectivity radius.
    """
    return m.log(x, y)
