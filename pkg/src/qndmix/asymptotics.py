"""Monte-Carlo experiments checking the limit theorems at desk scale.

Each experiment draws seeded replications, compares empirical moments against
their analytic targets (per hidden component first, then on the mixture) and
returns a JSON-serializable report with targets, estimates, tolerances and a
pass flag.  All randomness is derived per replication from
(master_seed, stream tag, component, replication index), so reports are
bitwise identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp
from scipy.stats import anderson

from .errors import ConstructionError, SingularFisherError
from .estimate import _golden_refine, loglik, maximize_scalar
from .model import (
    MixtureWeights,
    ParameterBox,
    ParametricFamily,
    fisher_information,
    kl_matrix,
)
from .simulate import CountVector, Trajectory, substream

__all__ = [
    "ExperimentPlan",
    "log_likelihood_ratio",
    "lamn_experiment",
    "mixture_collapse_experiment",
    "consistency_experiment",
    "cramer_rao_experiment",
    "purification_experiment",
    "mle_path",
]

# Stream tags keep the RNG streams of the different experiments disjoint.
TAG_LAMN, TAG_COLLAPSE, TAG_CONSIST, TAG_CRAMER, TAG_PURIFY, TAG_MIXGAMMA = range(6)

SINGULAR_EIG_TOL = 1e-10

# Report-level tolerances (finite-n surrogates; the paper gives no finite-n bounds).
LAMN_MEAN_SIGMAS = 3.0
LAMN_VAR_RTOL = 0.10
AD_LEVEL_PCT = 1.0
CRAMER_RATIO_BAND = (0.85, 1.15)
CRAMER_MIXTURE_RTOL = 0.10
COLLAPSE_SQRT_N_BOUND = 1e-6
COLLAPSE_QUANTILE = 0.95
COLLAPSE_RATE_SLACK = 0.5
PURIFY_LEVEL = 0.99
PURIFY_FRACTION = 0.95
PURIFY_TV_BOUND = 0.05


@dataclass(frozen=True)
class ExperimentPlan:
    """Shared experiment configuration.

    h is the local parameter shift: replications under the shifted law use
    theta* + h/sqrt(n).  theta* must be interior to the box and every shifted
    parameter must stay inside it.
    """

    family: ParametricFamily
    q: MixtureWeights
    theta_star: np.ndarray
    h: np.ndarray = field(default_factory=lambda: np.array([0.0]))
    n_grid: tuple = (1_000, 5_000, 10_000)
    n_reps: int = 2_000
    master_seed: int = 0
    estimation_box: Optional[ParameterBox] = None
    n_workers: int = 1

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta_star, dtype=float))
        h = np.atleast_1d(np.asarray(self.h, dtype=float))
        if h.shape != theta.shape:
            raise ConstructionError("h must have the same dimension as theta_star")
        box = self.family.box
        if not box.is_interior(theta):
            raise ConstructionError("theta_star must be interior to the box")
        for n in self.n_grid:
            if n >= 1 and not box.contains(theta + h / np.sqrt(n), atol=1e-12):
                raise ConstructionError(f"theta_star + h/sqrt({n}) leaves the box")
        if self.q.size != self.family.n_components:
            raise ConstructionError("q does not match the number of components")
        theta.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))

    def search_box(self) -> ParameterBox:
        return self.estimation_box if self.estimation_box is not None else self.family.box


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------

def log_likelihood_ratio(
    fam: ParametricFamily,
    q: MixtureWeights,
    counts: CountVector,
    theta_a,
    theta_b,
) -> float:
    """ln P_{theta_a} - ln P_{theta_b} of the observed record (mixture laws)."""
    la = loglik(fam, q, counts, theta_a)
    lb = loglik(fam, q, counts, theta_b)
    return counts.n * (la.value - lb.value)


def _component_fishers(plan: ExperimentPlan) -> np.ndarray:
    """Per-component Fisher matrices at theta*; refuses on singularity."""
    mats = []
    for g in range(plan.family.n_components):
        m = fisher_information(plan.family, plan.theta_star, g).m
        if np.min(np.linalg.eigvalsh(m)) <= SINGULAR_EIG_TOL:
            raise SingularFisherError(
                f"Fisher information of component {g} is singular at theta*"
            )
        mats.append(m)
    return np.stack(mats)


def _counts_batch(
    fam: ParametricFamily, theta, gamma: int, n: int, seeds: Sequence[tuple]
) -> np.ndarray:
    """Multinomial count vectors, one per replication seed tuple; shape (R, l)."""
    p = fam.prob_table(theta)[gamma]
    p = p / p.sum()
    out = np.empty((len(seeds), fam.n_outcomes), dtype=np.int64)
    for i, key in enumerate(seeds):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=key[0], spawn_key=key[1:]))
        out[i] = rng.multinomial(n, p)
    return out


def _map_chunks(fn, n_items: int, n_workers: int):
    """Apply fn to index chunks, concatenating results in chunk order.

    Replication RNG streams are keyed by absolute index, so the result is
    independent of the chunking.
    """
    if n_workers <= 1:
        return fn(np.arange(n_items))
    chunks = np.array_split(np.arange(n_items), n_workers)
    chunks = [c for c in chunks if c.size]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def _mix_unnorm_logliks(
    fam: ParametricFamily, q: MixtureWeights, counts_matrix: np.ndarray, theta
) -> np.ndarray:
    """ln P_theta of each record, vectorized over the count rows."""
    logp = fam.log_prob_table(theta)                       # (d, l)
    terms = counts_matrix @ logp.T + q.log()[None, :]      # (R, d)
    return logsumexp(terms, axis=1)


def _draw_mixture_gammas(plan: ExperimentPlan, tag: int, n_reps: int) -> np.ndarray:
    gammas = np.empty(n_reps, dtype=np.int64)
    for r in range(n_reps):
        rng = substream(plan.master_seed, TAG_MIXGAMMA, tag, r)
        gammas[r] = rng.choice(plan.q.size, p=plan.q.q)
    return gammas


def _scalar_mle_batch(
    plan: ExperimentPlan, counts_matrix: np.ndarray, n: int, coarse: int = 64
) -> np.ndarray:
    """Mixture MLE for each count row (D = 1), over the plan's search box.

    Same scan-plus-golden-section scheme as estimate.mle, with the coarse scan
    shared across replications (the scan grid does not depend on the data).
    """
    fam, q = plan.family, plan.q
    box = plan.search_box()
    lo, hi = float(box.lower[0]), float(box.upper[0])
    logq = q.log()
    xs = np.linspace(lo, hi, coarse)
    logp_scan = np.stack([fam.log_prob_table(np.array([x])) for x in xs])  # (G, d, l)
    scan_vals = logsumexp(
        np.einsum("gdl,rl->rgd", logp_scan, counts_matrix) + logq[None, None, :], axis=2
    )  # (R, G)
    best = np.argmax(scan_vals, axis=1)

    def estimate_rows(rows: np.ndarray) -> np.ndarray:
        out = np.empty(rows.size)
        for i, r in enumerate(rows):
            c = counts_matrix[r]

            def f(x: float) -> float:
                terms = fam.log_prob_table(np.array([x])) @ c + logq
                return float(logsumexp(terms))

            j = int(best[r])
            a = xs[max(j - 1, 0)]
            b = xs[min(j + 1, coarse - 1)]
            out[i], _ = _golden_refine(f, a, b, 1e-8)
        return out

    return _map_chunks(estimate_rows, counts_matrix.shape[0], plan.n_workers)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# LAMN
# ---------------------------------------------------------------------------

def lamn_experiment(plan: ExperimentPlan) -> dict:
    """Sample the local log-likelihood ratio and compare against its limit law.

    Under the per-component law at theta*, ln P_{theta*+h/sqrt(n)} / P_{theta*}
    tends to N(-h'Ih/2, h'Ih) with I the component's Fisher information; over
    the mixture the limit is the q-weighted mixture of these Gaussians.
    Pass requires, per component at the largest n: empirical mean within
    3 standard errors of -h'Ih/2, variance within 10% of h'Ih, and the
    Anderson-Darling normality statistic below its 1% critical value.
    """
    fishers = _component_fishers(plan)
    h = plan.h
    d = plan.family.n_components
    n_max = max(plan.n_grid)
    per_component: dict = {}
    all_pass = True
    samples_at_nmax = {}

    for g in range(d):
        hih = float(h @ fishers[g] @ h)
        target_mean, target_var = -0.5 * hih, hih
        per_n = {}
        for n in plan.n_grid:
            theta_n = plan.theta_star + h / np.sqrt(n)

            def draw(rows, n=n, g=g):
                seeds = [(plan.master_seed, TAG_LAMN, g, n, int(r)) for r in rows]
                return _counts_batch(plan.family, plan.theta_star, g, n, seeds)

            cm = _map_chunks(draw, plan.n_reps, plan.n_workers)
            lr = _mix_unnorm_logliks(plan.family, plan.q, cm, theta_n) - _mix_unnorm_logliks(
                plan.family, plan.q, cm, plan.theta_star
            )
            mean, var = float(lr.mean()), float(lr.var(ddof=1))
            se = np.sqrt(var / plan.n_reps)
            entry = {
                "n": n,
                "mean": mean,
                "var": var,
                "target_mean": target_mean,
                "target_var": target_var,
                "mean_se": float(se),
                "mean_ok": bool(abs(mean - target_mean) <= LAMN_MEAN_SIGMAS * se),
                "var_ok": bool(abs(var / target_var - 1.0) <= LAMN_VAR_RTOL) if hih > 0 else bool(var == 0.0),
            }
            if hih > 0 and var > 0:
                std = (lr - lr.mean()) / lr.std(ddof=1)
                ad = anderson(std, dist="norm")
                crit = float(
                    ad.critical_values[list(ad.significance_level).index(AD_LEVEL_PCT)]
                )
                entry["ad_statistic"] = float(ad.statistic)
                entry["ad_critical_1pct"] = crit
                entry["ad_ok"] = bool(ad.statistic < crit)
            per_n[n] = entry
            if n == n_max:
                samples_at_nmax[g] = lr
        final = per_n[n_max]
        comp_pass = final["mean_ok"] and final["var_ok"] and final.get("ad_ok", True)
        per_component[g] = {"fisher_quadratic": hih, "by_n": per_n, "passed": comp_pass}
        all_pass = all_pass and comp_pass

    # Mixture limit via Lemma-style aggregation: reweight the per-component
    # samples by drawn gammas.
    gammas = _draw_mixture_gammas(plan, TAG_LAMN, plan.n_reps)
    mixture_samples = np.array(
        [samples_at_nmax[int(g)][i] for i, g in enumerate(gammas)]
    )
    hih_all = np.einsum("i,gij,j->g", h, fishers, h)
    mix_mean_target = float(plan.q.q @ (-0.5 * hih_all))
    mix_second = plan.q.q @ (hih_all + 0.25 * hih_all**2)
    mix_var_target = float(mix_second - mix_mean_target**2)
    report = {
        "experiment": "lamn",
        "theta_star": plan.theta_star,
        "h": h,
        "n_grid": plan.n_grid,
        "n_reps": plan.n_reps,
        "master_seed": plan.master_seed,
        "per_component": per_component,
        "mixture": {
            "mean": float(mixture_samples.mean()),
            "var": float(mixture_samples.var(ddof=1)),
            "target_mean": mix_mean_target,
            "target_var": mix_var_target,
        },
        "passed": all_pass,
    }
    return _jsonable(report)


# ---------------------------------------------------------------------------
# Mixture collapse
# ---------------------------------------------------------------------------

def _log_collapse_ratio(
    fam: ParametricFamily, q: MixtureWeights, counts_matrix: np.ndarray, theta, gamma: int
) -> np.ndarray:
    """ln r_n with r_n = P_theta / (q(gamma) P_{theta|gamma}) - 1, exactly.

    r_n = (1/q(gamma)) sum_{a != gamma} q(a) exp(C . (ln p_a - ln p_gamma)),
    evaluated in the log domain so exponentially small values keep full
    relative precision.
    """
    logp = fam.log_prob_table(theta)
    delta = counts_matrix @ (logp - logp[gamma]).T + q.log()[None, :]  # (R, d)
    others = np.delete(delta, gamma, axis=1)
    if others.shape[1] == 0:
        return np.full(counts_matrix.shape[0], -np.inf)
    return logsumexp(others, axis=1) - q.log()[gamma]


def mixture_collapse_experiment(plan: ExperimentPlan) -> dict:
    """Exponential collapse of the mixture onto the realized component.

    Along records from component gamma, the ratio of the mixture likelihood to
    q(gamma) times the component likelihood tends to 1 exponentially fast, at
    rate at least min_{a != gamma} KL(gamma | a) at theta*.  Checked at both
    theta* and the shifted theta* + h/sqrt(n).
    """
    fam, q = plan.family, plan.q
    d = fam.n_components
    n_grid = sorted(plan.n_grid)
    n_max = n_grid[-1]
    kl = kl_matrix(fam, plan.theta_star)
    per_component = {}
    all_pass = True

    for g in range(d):
        p = fam.prob_table(plan.theta_star)[g]

        def draw(rows, g=g):
            # One trajectory per seed; counts accumulated along the n grid.
            out = np.empty((rows.size, len(n_grid), fam.n_outcomes), dtype=np.int64)
            for i, r in enumerate(rows):
                rng = np.random.default_rng(
                    np.random.SeedSequence(
                        entropy=plan.master_seed, spawn_key=(TAG_COLLAPSE, g, int(r))
                    )
                )
                cdf = np.cumsum(p / p.sum())
                cdf[-1] = 1.0
                outcomes = np.searchsorted(cdf, rng.random(n_max), side="right")
                for k, n in enumerate(n_grid):
                    out[i, k] = np.bincount(outcomes[:n], minlength=fam.n_outcomes)
            return out

        cm = _map_chunks(draw, plan.n_reps, plan.n_workers)
        log_r = np.empty((plan.n_reps, len(n_grid)))
        log_r_shift = np.empty_like(log_r)
        for k, n in enumerate(n_grid):
            theta_n = plan.theta_star + plan.h / np.sqrt(n)
            log_r[:, k] = _log_collapse_ratio(fam, q, cm[:, k], plan.theta_star, g)
            log_r_shift[:, k] = _log_collapse_ratio(fam, q, cm[:, k], theta_n, g)

        sqrt_n_r = np.sqrt(n_max) * np.exp(log_r[:, -1])
        sqrt_n_r_shift = np.sqrt(n_max) * np.exp(log_r_shift[:, -1])
        frac_ok = float(np.mean(sqrt_n_r < COLLAPSE_SQRT_N_BOUND))
        frac_ok_shift = float(np.mean(sqrt_n_r_shift < COLLAPSE_SQRT_N_BOUND))
        min_kl = float(np.min(np.delete(kl[g], g))) if d > 1 else np.inf
        if d > 1:
            # ln r_n ~ -rate * n; least-squares slope of the mean path.
            mean_log_r = log_r.mean(axis=0)
            ns = np.asarray(n_grid, dtype=float)
            rate = float(-np.polyfit(ns, mean_log_r, 1)[0])
            rate_ok = rate >= COLLAPSE_RATE_SLACK * min_kl
        else:
            rate, rate_ok = np.inf, True
        comp_pass = (
            frac_ok >= COLLAPSE_QUANTILE
            and frac_ok_shift >= COLLAPSE_QUANTILE
            and rate_ok
        )
        per_component[g] = {
            "min_kl": min_kl,
            "fitted_rate": rate,
            "rate_ok": bool(rate_ok),
            "sqrt_n_r_median": float(np.median(sqrt_n_r)),
            "fraction_below_bound": frac_ok,
            "fraction_below_bound_shifted": frac_ok_shift,
            "n_checked": n_max,
            "passed": bool(comp_pass),
        }
        all_pass = all_pass and comp_pass

    report = {
        "experiment": "collapse",
        "theta_star": plan.theta_star,
        "h": plan.h,
        "n_grid": n_grid,
        "n_reps": plan.n_reps,
        "master_seed": plan.master_seed,
        "bound": COLLAPSE_SQRT_N_BOUND,
        "per_component": per_component,
        "passed": all_pass,
    }
    return _jsonable(report)


# ---------------------------------------------------------------------------
# Consistency
# ---------------------------------------------------------------------------

def consistency_experiment(plan: ExperimentPlan) -> dict:
    """Error quantiles of the mixture MLE along the n grid; medians must fall."""
    n_grid = sorted(plan.n_grid)
    by_n = {}
    medians = []
    for n in n_grid:
        gammas = _draw_mixture_gammas(plan, TAG_CONSIST + n, plan.n_reps)

        def draw(rows, n=n):
            cm = np.empty((rows.size, plan.family.n_outcomes), dtype=np.int64)
            for i, r in enumerate(rows):
                seeds = [(plan.master_seed, TAG_CONSIST, n, int(r))]
                cm[i] = _counts_batch(
                    plan.family, plan.theta_star, int(gammas[r]), n, seeds
                )[0]
            return cm

        cm = _map_chunks(draw, plan.n_reps, plan.n_workers)
        theta_hats = _scalar_mle_batch(plan, cm, n)
        errors = np.abs(theta_hats - plan.theta_star[0])
        med = float(np.median(errors))
        medians.append(med)
        by_n[n] = {
            "median_abs_error": med,
            "q90_abs_error": float(np.quantile(errors, 0.9)),
            "max_abs_error": float(errors.max()),
        }
    decreasing = all(b < a for a, b in zip(medians, medians[1:]))
    report = {
        "experiment": "consistency",
        "theta_star": plan.theta_star,
        "n_grid": n_grid,
        "n_reps": plan.n_reps,
        "master_seed": plan.master_seed,
        "by_n": by_n,
        "median_decreasing": decreasing,
        "passed": decreasing,
    }
    return _jsonable(report)


def mle_path(
    plan: ExperimentPlan,
    traj: Trajectory,
    n_points: Sequence[int],
) -> list[tuple[int, float]]:
    """Mixture MLE along growing prefixes of one trajectory (D = 1)."""
    path = []
    for n in sorted(int(n) for n in n_points):
        c = np.bincount(traj.outcomes[:n], minlength=plan.family.n_outcomes)
        theta_hat = _scalar_mle_batch(plan, c[None, :], n)[0]
        path.append((n, float(theta_hat)))
    return path


# ---------------------------------------------------------------------------
# Cramer-Rao saturation
# ---------------------------------------------------------------------------

def cramer_rao_experiment(plan: ExperimentPlan) -> dict:
    """Efficiency of the MLE against the per-component inverse Fisher bound.

    Replications are generated under the shifted law theta* + h/sqrt(n) at the
    largest n.  Per realized component, the variance of sqrt(n)(theta_hat -
    theta* - h/sqrt(n)) must match 1/I(gamma) within the efficiency band; the
    mixture second moment must match sum_a q(a)/I(a) within 10%.
    """
    if plan.family.dim != 1:
        raise NotImplementedError("cramer_rao_experiment currently covers D = 1")
    fishers = _component_fishers(plan)[:, 0, 0]
    n = max(plan.n_grid)
    theta_n = plan.theta_star + plan.h / np.sqrt(n)
    d = plan.family.n_components
    per_component = {}
    all_pass = True

    for g in range(d):
        def draw(rows, g=g):
            seeds = [(plan.master_seed, TAG_CRAMER, g, int(r)) for r in rows]
            return _counts_batch(plan.family, theta_n, g, n, seeds)

        cm = _map_chunks(draw, plan.n_reps, plan.n_workers)
        theta_hats = _scalar_mle_batch(plan, cm, n)
        root = np.sqrt(n) * (theta_hats - theta_n[0])
        var = float(root.var(ddof=1))
        target = 1.0 / fishers[g]
        ratio = var / target
        ok = CRAMER_RATIO_BAND[0] <= ratio <= CRAMER_RATIO_BAND[1]
        per_component[g] = {
            "fisher": float(fishers[g]),
            "var": var,
            "mean": float(root.mean()),
            "target_var": target,
            "efficiency_ratio": float(ratio),
            "passed": bool(ok),
        }
        all_pass = all_pass and ok

    gammas = _draw_mixture_gammas(plan, TAG_CRAMER, plan.n_reps)

    def draw_mix(rows):
        cm = np.empty((rows.size, plan.family.n_outcomes), dtype=np.int64)
        for i, r in enumerate(rows):
            seeds = [(plan.master_seed, TAG_CRAMER, d, int(r))]
            cm[i] = _counts_batch(plan.family, theta_n, int(gammas[r]), n, seeds)[0]
        return cm

    cm = _map_chunks(draw_mix, plan.n_reps, plan.n_workers)
    theta_hats = _scalar_mle_batch(plan, cm, n)
    root = np.sqrt(n) * (theta_hats - theta_n[0])
    second = float(np.mean(root**2))
    target_second = float(plan.q.q @ (1.0 / fishers))
    mix_ok = abs(second / target_second - 1.0) <= CRAMER_MIXTURE_RTOL
    all_pass = all_pass and mix_ok

    report = {
        "experiment": "cramer_rao",
        "theta_star": plan.theta_star,
        "h": plan.h,
        "n": n,
        "n_reps": plan.n_reps,
        "master_seed": plan.master_seed,
        "per_component": per_component,
        "mixture": {
            "second_moment": second,
            "target": target_second,
            "ratio": second / target_second,
            "passed": bool(mix_ok),
        },
        "efficiency_band": CRAMER_RATIO_BAND,
        "passed": all_pass,
    }
    return _jsonable(report)


# ---------------------------------------------------------------------------
# Posterior purification
# ---------------------------------------------------------------------------

def purification_experiment(plan: ExperimentPlan) -> dict:
    """Posterior concentration on the realized component.

    Posteriors are computed from cumulative outcome counts, which equals
    folding the Bayes filter step by step (exchangeability; the equality of
    the two paths is a tested invariant).  Reports the fraction of runs with
    q_n(gamma) > 0.99 at each n and the total-variation distance between the
    law of argmax q_n at the largest n and the mixture weights q.
    """
    fam, q = plan.family, plan.q
    n_grid = sorted(plan.n_grid)
    n_max = n_grid[-1]
    logp = fam.log_prob_table(plan.theta_star)
    gammas = _draw_mixture_gammas(plan, TAG_PURIFY, plan.n_reps)
    prob_rows = fam.prob_table(plan.theta_star)

    def run(rows):
        res = np.empty((rows.size, len(n_grid) + 1))  # per-n hit flags + final argmax
        for i, r in enumerate(rows):
            g = int(gammas[r])
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=plan.master_seed, spawn_key=(TAG_PURIFY, int(r)))
            )
            p = prob_rows[g]
            cdf = np.cumsum(p / p.sum())
            cdf[-1] = 1.0
            outcomes = np.searchsorted(cdf, rng.random(n_max), side="right")
            for k, n in enumerate(n_grid):
                c = np.bincount(outcomes[:n], minlength=fam.n_outcomes)
                terms = q.log() + logp @ c
                post = np.exp(terms - logsumexp(terms))
                res[i, k] = post[g] > PURIFY_LEVEL
                if n == n_max:
                    res[i, -1] = int(np.argmax(post))
        return res

    res = _map_chunks(run, plan.n_reps, plan.n_workers)
    fractions = {n: float(res[:, k].mean()) for k, n in enumerate(n_grid)}
    argmax_counts = np.bincount(res[:, -1].astype(int), minlength=fam.n_components)
    empirical = argmax_counts / plan.n_reps
    tv = 0.5 * float(np.abs(empirical - q.q).sum())
    frac_ok = fractions[n_max] >= PURIFY_FRACTION
    tv_ok = tv <= PURIFY_TV_BOUND
    report = {
        "experiment": "purification",
        "theta_star": plan.theta_star,
        "n_grid": n_grid,
        "n_reps": plan.n_reps,
        "master_seed": plan.master_seed,
        "fraction_purified": fractions,
        "argmax_distribution": empirical,
        "tv_distance_to_q": tv,
        "passed": bool(frac_ok and tv_ok),
    }
    return _jsonable(report)
