"""N-sweep harness: energies, discrepancy and separation across a
geometric schedule, with log-log rate fits.

The discrepancy column is the finite-center lower bound, not the true
supremum; the fitted constants inherit that caveat and every emitted
report carries it verbatim.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .discrepancy import estimate_discrepancy
from .energy import check_exponent, continuous_energy, discrete_energy
from .errors import InputError
from .manifold import FlatTorus, Manifold, Sphere
from .pointsets import (PointSet, farthest_point_sample, fibonacci_sphere,
                        kronecker_torus, min_geodesic_distance)
from .verify import energy_rate_exponent

CSV_COLUMNS = ["N", "energy_discrete", "energy_continuous", "gap",
               "disc_estimate", "separation", "gamma_hat"]

LOWER_BOUND_CAVEAT = (
    "disc_estimate is a finite-center lower bound on the true ball "
    "discrepancy; the gap between the two is unquantified."
)


@dataclass
class RateExperimentConfig:
    manifold: Manifold
    s: float
    generator: str                     # fibonacci | kronecker | farthest-point | uniform
    ns: list                           # strictly increasing schedule
    extra_centers: int = 0
    seed: int = 0
    quad_tol: float = 1e-10
    generator_params: dict = field(default_factory=dict)

    def validate(self):
        check_exponent(self.s, self.manifold.dim)
        if len(self.ns) < 1:
            raise InputError("schedule must contain at least one N")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise InputError("schedule must be strictly increasing")
        if any(n < 2 for n in self.ns):
            raise InputError("every N in the schedule must be >= 2")
        if self.extra_centers < 0:
            raise InputError("extra_centers must be >= 0")

    def describe(self) -> dict:
        return {
            "manifold": self.manifold.describe(),
            "s": self.s,
            "generator": self.generator,
            "ns": [int(n) for n in self.ns],
            "extra_centers": int(self.extra_centers),
            "seed": int(self.seed),
            "quad_tol": self.quad_tol,
            "generator_params": dict(self.generator_params),
        }


@dataclass
class RateRow:
    n: int
    energy_discrete: float
    energy_continuous: float
    gap: float
    disc_estimate: float
    separation: float
    gamma_hat: float
    runtime_s: float   # informational only; excluded from serialized reports


@dataclass
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "r_squared": self.r_squared}


@dataclass
class RateReport:
    config: dict
    rows: list
    rate_exponent: float
    c_hat: float
    c_hat_first_half: float
    second_half_max_ratio: float | None
    gamma_band: float | None
    fit_gap_vs_n: LogLogFit | None
    fit_disc_vs_n: LogLogFit | None
    fit_gap_vs_disc: LogLogFit | None
    caveat: str = LOWER_BOUND_CAVEAT

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "rows": [
                {
                    "N": r.n,
                    "energy_discrete": r.energy_discrete,
                    "energy_continuous": r.energy_continuous,
                    "gap": r.gap,
                    "disc_estimate": r.disc_estimate,
                    "separation": r.separation,
                    "gamma_hat": r.gamma_hat,
                }
                for r in self.rows
            ],
            "rate_exponent": self.rate_exponent,
            "c_hat": self.c_hat,
            "c_hat_first_half": self.c_hat_first_half,
            "second_half_max_ratio": self.second_half_max_ratio,
            "gamma_band": self.gamma_band,
            "fit_gap_vs_n": self.fit_gap_vs_n.to_dict() if self.fit_gap_vs_n else None,
            "fit_disc_vs_n": self.fit_disc_vs_n.to_dict() if self.fit_disc_vs_n else None,
            "fit_gap_vs_disc": self.fit_gap_vs_disc.to_dict() if self.fit_gap_vs_disc else None,
            "caveat": self.caveat,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([
                r.n,
                repr(float(r.energy_discrete)),
                repr(float(r.energy_continuous)),
                repr(float(r.gap)),
                repr(float(r.disc_estimate)),
                repr(float(r.separation)),
                repr(float(r.gamma_hat)),
            ])
        return buf.getvalue()


def fit_loglog(xs, ys) -> LogLogFit:
    """Least squares of log(y) on log(x); inputs must be positive."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) != len(ys) or len(xs) < 2:
        raise InputError("need at least 2 paired samples")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise InputError("log-log fit requires strictly positive data")
    lx, ly = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LogLogFit(float(slope), float(intercept), r2)


def _generate(cfg: RateExperimentConfig, n: int, row_seed: int) -> PointSet:
    m = cfg.manifold
    gen = cfg.generator
    if gen == "fibonacci":
        if not (isinstance(m, Sphere) and m.dim == 2):
            raise InputError("the fibonacci generator requires the sphere S^2")
        return fibonacci_sphere(n)
    if gen == "kronecker":
        if not isinstance(m, FlatTorus):
            raise InputError("the kronecker generator requires a flat torus")
        return kronecker_torus(m.dim, n)
    if gen == "farthest-point":
        pool = int(cfg.generator_params.get("candidate_pool", 10 * n))
        return farthest_point_sample(m, n, seed=row_seed, candidate_pool=pool)
    if gen == "uniform":
        return PointSet(m, m.sample(row_seed, n),
                        provenance={"generator": "uniform", "seed": row_seed, "n": n})
    raise InputError(f"unknown generator {gen!r}")


def _safe_fit(xs, ys):
    try:
        return fit_loglog(xs, ys)
    except InputError:
        return None


def run_rate_experiment(cfg: RateExperimentConfig, threads=None) -> RateReport:
    """One sweep: for each N generate, measure, then fit the log-log rates
    and the bound constant c_hat = max gap / disc^exponent.

    c_hat is also fitted on the first half of the schedule alone; the
    ratio of second-half gaps to that bound is the falsifiable form of
    the asymptotic claim.  Deterministic given the config.
    """
    cfg.validate()
    m = cfg.manifold
    kappa = energy_rate_exponent(m.dim, cfg.s)
    e_cont = continuous_energy(m, cfg.s, cfg.quad_tol)
    rows = []
    for idx, n in enumerate(cfg.ns):
        t0 = time.perf_counter()
        row_seed = cfg.seed * 100003 + idx
        X = _generate(cfg, int(n), row_seed)
        sep = min_geodesic_distance(X)
        if sep.has_duplicates:
            raise InputError(f"generator produced coincident points at N={n}")
        e_disc = discrete_energy(X, cfg.s, threads=threads)
        disc = estimate_discrepancy(X, extra_centers=cfg.extra_centers,
                                    seed=row_seed, threads=threads)
        rows.append(RateRow(
            n=int(n),
            energy_discrete=float(e_disc),
            energy_continuous=float(e_cont),
            gap=float(abs(e_disc - e_cont)),
            disc_estimate=float(disc.value),
            separation=float(sep.min_distance),
            gamma_hat=float(sep.gamma_hat),
            runtime_s=time.perf_counter() - t0,
        ))
    ns = np.array([r.n for r in rows], dtype=float)
    gaps = np.array([r.gap for r in rows])
    discs = np.array([r.disc_estimate for r in rows])
    gammas = np.array([r.gamma_hat for r in rows])
    with np.errstate(divide="ignore"):
        c_all = float(np.max(gaps / discs ** kappa)) if len(rows) else math.inf
    half = max(1, len(rows) // 2)
    c_half = float(np.max(gaps[:half] / discs[:half] ** kappa))
    if len(rows) > half:
        second = gaps[half:] / (c_half * discs[half:] ** kappa)
        second_max = float(np.max(second))
    else:
        second_max = None
    gamma_band = float(gammas.max() / gammas.min()) if len(rows) >= 2 else None
    fits = (None, None, None)
    if len(rows) >= 2:
        fits = (_safe_fit(ns, gaps), _safe_fit(ns, discs), _safe_fit(discs, gaps))
    return RateReport(
        config=cfg.describe(),
        rows=rows,
        rate_exponent=kappa,
        c_hat=c_all,
        c_hat_first_half=c_half,
        second_half_max_ratio=second_max,
        gamma_band=gamma_band,
        fit_gap_vs_n=fits[0],
        fit_disc_vs_n=fits[1],
        fit_gap_vs_disc=fits[2],
    )


def geometric_schedule(n_min: int, n_max: int) -> list:
    """Doubling schedule n_min, 2 n_min, ..., up to n_max."""
    if n_min < 2 or n_max < n_min:
        raise InputError("need 2 <= n_min <= n_max")
    out = []
    n = n_min
    while n <= n_max:
        out.append(n)
        n *= 2
    return out
