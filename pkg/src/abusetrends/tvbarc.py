"""Time-varying Bayesian autoregressive Poisson count model.

The observed count at day t is conditionally Poisson with intensity
``mu(t/T) + sum_i a_i(t/T) * x[t-i]``, where the trend ``mu`` and the lag
coefficient functions ``a_i`` are non-negative B-spline expansions.  The
lag functions satisfy a stability constraint: the per-lag suprema sum to
less than one, which keeps the mean recursion contractive.

Fitting is Metropolis-within-Gibbs with proposals that violate
positivity or stability rejected outright (Metropolis-Hastings on the
truncated prior): random-walk blocks on the log trend coefficients and
on each standardized lag row, scale moves for the global-local shrinkage
hierarchy in a non-centered parameterization, and extra symmetric moves
(trend/lag shears, row swaps, one global adapted-covariance block) that
traverse the weakly identified directions.  Step sizes adapt toward a
target acceptance rate during burn-in only, so detailed balance holds
for retained draws.  All draws are deterministic given the seed.
"""

from __future__ import annotations

import base64
import dataclasses
import datetime as dt
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .splines import BSplineBasis

LAMBDA_MIN = 1e-10

_HALF_NORMAL_CONST = 0.5 * math.log(2.0 / math.pi)

CHECKPOINT_FORMAT = "tvbarc-draws-v1"


@dataclass(frozen=True)
class ModelSpec:
    """Structural choices for the model.

    Defaults follow the study setup: lag order 10 (15 is the alternative),
    cubic splines, eight basis functions for the trend and five for each
    lag function, and a 1% stability margin.

    The lag-coefficient prior is global-local shrinkage: coefficients in
    lag row i are half-normal with scale ``g * l_i``, the row-local
    scales ``l_i`` are standard half-Cauchy, and the shared global scale
    ``g`` is half-Cauchy with scale ``lag_prior_scale``.  With ten or
    more non-negative lag functions a flat prior lets the weakly
    identified ones pile up mass away from zero, biasing the trend and
    the real lags downward.  The global scale adapts to how much total
    lag signal the data carry while the heavy-tailed locals release the
    rows that are genuinely nonzero, so null lags collapse and real lags
    stay essentially unshrunk.
    """

    lag_order: int = 10
    n_basis_mu: int = 8
    n_basis_lag: int = 5
    spline_degree: int = 3
    stability_margin: float = 0.01
    lag_prior_scale: float = 0.1

    def __post_init__(self):
        if self.lag_order < 1:
            raise ValueError("lag_order must be at least 1")
        if self.spline_degree < 0:
            raise ValueError("spline_degree must be non-negative")
        minimum = self.spline_degree + 1
        if self.n_basis_mu < minimum or self.n_basis_lag < minimum:
            raise ValueError(f"basis sizes must be at least degree + 1 ({minimum})")
        if not 0.0 < self.stability_margin < 1.0:
            raise ValueError("stability_margin must lie in (0, 1)")
        if self.lag_prior_scale <= 0.0:
            raise ValueError("lag_prior_scale must be positive")


def model_bases(spec: ModelSpec) -> tuple[BSplineBasis, BSplineBasis]:
    """Clamped bases for the trend and for the lag coefficient functions."""
    return (
        BSplineBasis.clamped(spec.n_basis_mu, spec.spline_degree),
        BSplineBasis.clamped(spec.n_basis_lag, spec.spline_degree),
    )


@dataclass(frozen=True)
class McmcConfig:
    n_iter: int = 320000
    n_burn: int = 60000
    thin: int = 52
    seed: int = 0
    step_b: float = 0.05
    step_c: float = 0.25
    target_accept: float = 0.3

    def __post_init__(self):
        if not 0 <= self.n_burn < self.n_iter:
            raise ValueError("require 0 <= n_burn < n_iter")
        if self.thin < 1:
            raise ValueError("thin must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.step_b <= 0 or self.step_c <= 0:
            raise ValueError("initial step sizes must be positive")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")


@dataclass
class TvbarcParams:
    """Spline coefficients: ``b`` for the trend, ``c`` rows for each lag.

    ``tau`` holds the per-lag local scales and ``tau_global`` the shared
    global scale of the shrinkage prior.  Leaving them ``None`` keeps
    standalone density evaluations well-defined: with no ``tau`` every
    row uses the hyperprior scale directly, and with ``tau`` but no
    ``tau_global`` the row scales are taken as given (single-level
    hierarchy).
    """

    b: np.ndarray
    c: np.ndarray
    tau: np.ndarray | None = None
    tau_global: float | None = None

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=np.float64)
        self.c = np.asarray(self.c, dtype=np.float64)
        if self.b.ndim != 1 or self.c.ndim != 2:
            raise ValueError("b must be a vector and c a (lag, basis) matrix")
        if self.tau is not None:
            self.tau = np.asarray(self.tau, dtype=np.float64)
            if self.tau.shape != (self.c.shape[0],):
                raise ValueError("tau must hold one scale per lag row")
        if self.tau_global is not None and self.tau is None:
            raise ValueError("tau_global requires tau")

    def stability_sum(self) -> float:
        """Sum over lags of the per-row coefficient maxima.

        Because the basis is a partition of unity, each ``a_i(u)`` is
        bounded by its row maximum, so this bounds ``sum_i sup_u a_i(u)``.
        """
        return float(self.c.max(axis=1).sum()) if self.c.size else 0.0

    def validate(self, stability_margin: float) -> None:
        if np.any(self.b < 0.0):
            raise ValueError("trend coefficients must be non-negative")
        if np.any(self.c < 0.0):
            raise ValueError("lag coefficients must be non-negative")
        if self.stability_sum() > 1.0 - stability_margin:
            raise ValueError(
                f"stability constraint violated: {self.stability_sum():.6f} "
                f"> {1.0 - stability_margin}"
            )


def lambda_at(
    params: TvbarcParams,
    bases: tuple[BSplineBasis, BSplineBasis],
    t: int,
    t_len: int,
    history,
) -> float:
    """Intensity at 1-based day ``t`` given the previous ``p`` counts.

    ``history`` is chronological: ``history[-1]`` is the count at t-1,
    ``history[0]`` the count at t-p.  The result is floored at a small
    positive constant so the log-likelihood stays finite.
    """
    basis_mu, basis_lag = bases
    p = params.c.shape[0]
    history = np.asarray(history, dtype=np.float64)
    if t <= p:
        raise ValueError(f"t must exceed the lag order {p}, got {t}")
    if history.shape != (p,):
        raise ValueError(f"history must hold exactly {p} values")
    u = t / t_len
    mu = float(params.b @ basis_mu.design_matrix([u])[0])
    a = params.c @ basis_lag.design_matrix([u])[0]
    lam = mu + float(a @ history[::-1])
    return max(lam, LAMBDA_MIN)


def _likelihood_parts(values: np.ndarray, spec: ModelSpec):
    """Design matrices and lag matrix for the conditional likelihood."""
    t_len = len(values)
    p = spec.lag_order
    basis_mu, basis_lag = model_bases(spec)
    u = np.arange(1, t_len + 1, dtype=np.float64) / t_len
    design_mu = basis_mu.design_matrix(u)[p:]
    design_lag = basis_lag.design_matrix(u)[p:]
    lagmat = np.column_stack(
        [values[p - i : t_len - i] for i in range(1, p + 1)]
    ).astype(np.float64)
    x_tail = values[p:].astype(np.float64)
    return design_mu, design_lag, lagmat, x_tail


def log_likelihood(
    params: TvbarcParams,
    bases: tuple[BSplineBasis, BSplineBasis],
    series,
    p: int,
) -> float:
    """Conditional Poisson log-likelihood given the first ``p`` observations."""
    values = np.asarray(series.values, dtype=np.int64)
    if len(values) <= p:
        raise ValueError("series must be longer than the lag order")
    basis_mu, basis_lag = bases
    t_len = len(values)
    u = np.arange(1, t_len + 1, dtype=np.float64) / t_len
    design_mu = basis_mu.design_matrix(u)[p:]
    design_lag = basis_lag.design_matrix(u)[p:]
    lagmat = np.column_stack(
        [values[p - i : t_len - i] for i in range(1, p + 1)]
    ).astype(np.float64)
    x_tail = values[p:].astype(np.float64)
    lam = design_mu @ params.b + ((design_lag @ params.c.T) * lagmat).sum(axis=1)
    np.maximum(lam, LAMBDA_MIN, out=lam)
    return float(x_tail @ np.log(lam) - lam.sum() - gammaln(x_tail + 1.0).sum())


def _row_logprior(row: np.ndarray, tau: float) -> float:
    """Half-normal log-density of one lag row given its scale."""
    return float(
        len(row) * (_HALF_NORMAL_CONST - math.log(tau))
        - 0.5 * np.sum((row / tau) ** 2)
    )


def _tau_log_hyperprior(tau: float, tau0: float) -> float:
    """Half-Cauchy log-density of one row scale."""
    if tau <= 0.0:
        return -math.inf
    return math.log(2.0 / (math.pi * tau0)) - math.log1p((tau / tau0) ** 2)


def log_prior(params: TvbarcParams, spec: ModelSpec, prior_scale: float) -> float:
    """Joint log-prior over trend coefficients, lag coefficients, and the
    shrinkage scales, truncated to the constraint region.

    Trend coefficients are half-normal with scale ``prior_scale``.  With
    the full hierarchy (``tau`` locals plus ``tau_global``), lag row i is
    half-normal with scale ``tau_global * tau_i``, the locals are
    standard half-Cauchy, and the global scale is half-Cauchy with scale
    ``spec.lag_prior_scale``.  With ``tau`` alone the row scales are
    half-Cauchy(``spec.lag_prior_scale``); with neither, rows use
    ``spec.lag_prior_scale`` directly.  Returns ``-inf`` whenever
    positivity or the stability constraint is violated, which encodes
    constraint enforcement by proposal rejection.
    """
    if prior_scale <= 0:
        raise ValueError("prior_scale must be positive")
    if np.any(params.b < 0.0) or np.any(params.c < 0.0):
        return -math.inf
    if params.tau is not None and np.any(params.tau <= 0.0):
        return -math.inf
    if params.tau_global is not None and params.tau_global <= 0.0:
        return -math.inf
    if params.stability_sum() > 1.0 - spec.stability_margin:
        return -math.inf
    k = len(params.b)
    total = float(
        k * (_HALF_NORMAL_CONST - math.log(prior_scale))
        - 0.5 * np.sum((params.b / prior_scale) ** 2)
    )
    for i in range(params.c.shape[0]):
        if params.tau is None:
            total += _row_logprior(params.c[i], spec.lag_prior_scale)
        elif params.tau_global is None:
            tau = float(params.tau[i])
            total += _row_logprior(params.c[i], tau)
            total += _tau_log_hyperprior(tau, spec.lag_prior_scale)
        else:
            local = float(params.tau[i])
            total += _row_logprior(params.c[i], params.tau_global * local)
            total += _tau_log_hyperprior(local, 1.0)
    if params.tau_global is not None:
        total += _tau_log_hyperprior(params.tau_global, spec.lag_prior_scale)
    return total


@dataclass(eq=False)
class PosteriorDraws:
    """Retained post-burn-in, thinned states plus sampler diagnostics."""

    b: np.ndarray  # (n_kept, n_basis_mu)
    c: np.ndarray  # (n_kept, lag_order, n_basis_lag)
    log_post: np.ndarray  # (n_kept,)
    accept_rates: dict[str, float]
    spec: ModelSpec
    mcmc: McmcConfig
    prior_scale: float
    t_len: int
    start_date: dt.date | None = None
    tau: np.ndarray | None = None  # (n_kept, lag_order) local shrinkage scales
    tau_global: np.ndarray | None = None  # (n_kept,) global shrinkage scale

    def __len__(self) -> int:
        return len(self.b)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PosteriorDraws):
            return NotImplemented
        def _opt_equal(a, b):
            if a is None or b is None:
                return a is None and b is None
            return np.array_equal(a, b)

        return (
            _opt_equal(self.tau, other.tau)
            and _opt_equal(self.tau_global, other.tau_global)
            and np.array_equal(self.b, other.b)
            and np.array_equal(self.c, other.c)
            and np.array_equal(self.log_post, other.log_post)
            and self.accept_rates == other.accept_rates
            and self.spec == other.spec
            and self.mcmc == other.mcmc
            and self.prior_scale == other.prior_scale
            and self.t_len == other.t_len
            and self.start_date == other.start_date
        )

    def save(self, path) -> None:
        """Write a self-contained JSON checkpoint (see README for the format)."""
        payload = {
            "format": CHECKPOINT_FORMAT,
            "spec": dataclasses.asdict(self.spec),
            "mcmc": dataclasses.asdict(self.mcmc),
            "prior_scale": self.prior_scale,
            "t_len": self.t_len,
            "start_date": self.start_date.isoformat() if self.start_date else None,
            "accept_rates": self.accept_rates,
            "arrays": {
                "b": _encode_array(self.b),
                "c": _encode_array(self.c),
                "log_post": _encode_array(self.log_post),
            },
        }
        if self.tau is not None:
            payload["arrays"]["tau"] = _encode_array(self.tau)
        if self.tau_global is not None:
            payload["arrays"]["tau_global"] = _encode_array(self.tau_global)
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, indent=1)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "PosteriorDraws":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != CHECKPOINT_FORMAT:
            raise ValueError(f"{path} is not a {CHECKPOINT_FORMAT} checkpoint")
        start = payload["start_date"]
        tau_entry = payload["arrays"].get("tau")
        tau_g_entry = payload["arrays"].get("tau_global")
        return cls(
            tau=_decode_array(tau_entry) if tau_entry else None,
            tau_global=_decode_array(tau_g_entry) if tau_g_entry else None,
            b=_decode_array(payload["arrays"]["b"]),
            c=_decode_array(payload["arrays"]["c"]),
            log_post=_decode_array(payload["arrays"]["log_post"]),
            accept_rates=payload["accept_rates"],
            spec=ModelSpec(**payload["spec"]),
            mcmc=McmcConfig(**payload["mcmc"]),
            prior_scale=payload["prior_scale"],
            t_len=payload["t_len"],
            start_date=dt.date.fromisoformat(start) if start else None,
        )


def _encode_array(array: np.ndarray) -> dict:
    data = np.ascontiguousarray(array, dtype="<f8")
    return {
        "shape": list(array.shape),
        "dtype": "<f8",
        "data": base64.b64encode(data.tobytes()).decode("ascii"),
    }


def _decode_array(entry: dict) -> np.ndarray:
    raw = base64.b64decode(entry["data"])
    return np.frombuffer(raw, dtype=entry["dtype"]).reshape(entry["shape"]).copy()


def _initial_params(
    values: np.ndarray,
    design_mu: np.ndarray,
    design_lag: np.ndarray,
    lagmat: np.ndarray,
    x_tail: np.ndarray,
    spec: ModelSpec,
) -> TvbarcParams:
    """Deterministic least-squares starting point, clipped into the
    constraint region.  Only affects where the chain starts, not the
    posterior."""
    p = spec.lag_order
    columns = [design_mu] + [design_lag * lagmat[:, i : i + 1] for i in range(p)]
    design = np.hstack(columns)
    coef, *_ = np.linalg.lstsq(design, x_tail, rcond=None)
    k_mu = spec.n_basis_mu
    mean = float(values.mean())
    b = np.maximum(coef[:k_mu], max(1e-2, 1e-2 * mean))
    c = np.maximum(coef[k_mu:].reshape(p, spec.n_basis_lag), 1e-4)
    cap = 1.0 - spec.stability_margin
    total = float(c.max(axis=1).sum())
    if total > 0.9 * cap:
        c *= 0.9 * cap / total
    g = max(float(np.median(c.mean(axis=1))), 0.02)
    tau = np.maximum(c.mean(axis=1) / g, 0.25)
    return TvbarcParams(b=b, c=c, tau=tau, tau_global=g)


class _BlockScale:
    """Per-block random-walk proposal with burn-in-only adaptation.

    The scalar step follows a Robbins-Monro recursion toward the target
    acceptance rate; the proposal shape comes from a running covariance
    of the visited states (adaptive Metropolis).  Both freeze once
    burn-in ends.
    """

    _MIN_SAMPLES = 200
    _REFRESH = 100

    def __init__(self, dim: int, step: float, target: float):
        self.step = step
        self.target = target
        self.dim = dim
        self._chol = np.eye(dim)
        self._count = 0
        self._mean = np.zeros(dim)
        self._m2 = np.zeros((dim, dim))

    def observe(self, state: np.ndarray, alpha: float, iteration: int) -> None:
        gamma = (iteration + 1) ** -0.6
        self.step = min(max(self.step * math.exp(gamma * (alpha - self.target)), 1e-8), 1e3)
        self._count += 1
        delta = state - self._mean
        self._mean += delta / self._count
        self._m2 += np.outer(delta, state - self._mean)
        if self._count >= self._MIN_SAMPLES and self._count % self._REFRESH == 0:
            cov = self._m2 / (self._count - 1)
            jitter = max(1e-12, 1e-6 * float(np.trace(cov)) / self.dim)
            try:
                chol = np.linalg.cholesky(cov + jitter * np.eye(self.dim))
            except np.linalg.LinAlgError:
                return
            # renormalize so the scalar step keeps its usual magnitude
            scale = float(np.sqrt(np.mean(np.diag(cov)) + jitter))
            self._chol = chol / scale

    def propose_offset(self, rng: np.random.Generator) -> np.ndarray:
        return self.step * (self._chol @ rng.standard_normal(self.dim))


def fit(
    series,
    spec: ModelSpec = ModelSpec(),
    mcmc: McmcConfig = McmcConfig(),
    prior_scale: float | None = None,
) -> PosteriorDraws:
    """Sample the posterior over trend and lag coefficient functions.

    ``series`` is a dated non-negative integer series (its ``values`` and
    ``start_date`` attributes are used).  The trend prior scale defaults
    to twice the series mean.  Deterministic given ``mcmc.seed``.

    The sampler is Metropolis-within-Gibbs.  Lag coefficients are updated
    in a non-centered parameterization ``c = g * l_i * w``: random-walk
    blocks on log trend coefficients and on each standardized lag row,
    scale moves on the local and global shrinkage scales (which rescale
    the rows with them, avoiding the usual funnel), plus symmetric
    trend/lag shear moves, pairwise row swaps, and one global
    adapted-covariance block.  Proposals violating positivity or the
    stability constraint are rejected outright; step sizes adapt toward
    the target acceptance rate during burn-in only and freeze afterwards.

    Raises:
        ValueError: series too short for the lag order and basis sizes,
            negative values, or a thinning setting that retains no draws.
    """
    values = np.asarray(series.values, dtype=np.int64)
    t_len = len(values)
    p = spec.lag_order
    if t_len <= p + max(spec.n_basis_mu, spec.n_basis_lag):
        raise ValueError(
            f"series length {t_len} must exceed lag_order + max basis size "
            f"({p} + {max(spec.n_basis_mu, spec.n_basis_lag)})"
        )
    if np.any(values < 0):
        raise ValueError("series values must be non-negative integers")
    if (mcmc.n_iter - mcmc.n_burn) < mcmc.thin:
        raise ValueError("no draws would be retained; lower thin or raise n_iter")
    if not values.any():
        warnings.warn(
            "all-zero series: the posterior is prior-dominated and degenerate",
            RuntimeWarning,
        )

    mean = float(values.mean())
    if prior_scale is None:
        prior_scale = 2.0 * mean if mean > 0 else 1.0

    design_mu, design_lag, lagmat, x_tail = _likelihood_parts(values, spec)
    lgamma_const = float(gammaln(x_tail + 1.0).sum())
    k_mu = spec.n_basis_mu
    k_lag = spec.n_basis_lag
    stability_cap = 1.0 - spec.stability_margin
    g0 = spec.lag_prior_scale

    def loglik(b: np.ndarray, c: np.ndarray) -> float:
        lam = design_mu @ b + ((design_lag @ c.T) * lagmat).sum(axis=1)
        np.maximum(lam, LAMBDA_MIN, out=lam)
        return float(x_tail @ np.log(lam) - lam.sum()) - lgamma_const

    def ll_from_lam(lam: np.ndarray) -> float:
        lam = np.maximum(lam, LAMBDA_MIN)
        return float(x_tail @ np.log(lam) - lam.sum()) - lgamma_const

    def contrib_col(row: np.ndarray, i: int) -> np.ndarray:
        return (design_lag @ row) * lagmat[:, i]

    def logprior_b(b: np.ndarray) -> float:
        return float(
            k_mu * (_HALF_NORMAL_CONST - math.log(prior_scale))
            - 0.5 * np.sum((b / prior_scale) ** 2)
        )

    rng = np.random.default_rng(mcmc.seed)

    init = _initial_params(values, design_mu, design_lag, lagmat, x_tail, spec)
    theta = np.log(init.b)
    b = init.b
    g = float(init.tau_global)
    lam_loc = init.tau.copy()
    w = init.c / (g * lam_loc[:, None])
    c = g * lam_loc[:, None] * w
    row_max = c.max(axis=1)

    mu_part = design_mu @ b
    contrib = (design_lag @ c.T) * lagmat
    row_sum = contrib.sum(axis=1)
    cur_ll = ll_from_lam(mu_part + row_sum)
    cur_lpb = logprior_b(b)

    scale_b = _BlockScale(k_mu, mcmc.step_b, mcmc.target_accept)
    scale_w = [_BlockScale(k_lag, mcmc.step_c, mcmc.target_accept) for _ in range(p)]
    scale_comp = [_BlockScale(1, 0.05, mcmc.target_accept) for _ in range(p)]
    scale_swap = [_BlockScale(1, 0.05, mcmc.target_accept) for _ in range(p)]
    scale_loc = [_BlockScale(1, 0.4, mcmc.target_accept) for _ in range(p)]
    scale_glob = _BlockScale(1, 0.4, mcmc.target_accept)
    n_all = k_mu + p * k_lag + p + 1
    scale_all = _BlockScale(n_all, 0.3 / math.sqrt(n_all), mcmc.target_accept)
    # local level of each lag regressor under every trend basis function,
    # used by the compensated shear moves to offset a lag shift with a
    # matching trend-shape shift
    _mass = design_mu.sum(axis=0)
    lag_level = (design_mu.T @ lagmat) / np.where(_mass > 0, _mass, 1.0)[:, None]

    n_kept = (mcmc.n_iter - mcmc.n_burn) // mcmc.thin
    kept_b = np.empty((n_kept, k_mu))
    kept_c = np.empty((n_kept, p, k_lag))
    kept_tau = np.empty((n_kept, p))
    kept_g = np.empty(n_kept)
    kept_lp = np.empty(n_kept)
    kept = 0

    post_prop = np.zeros(1 + p)
    post_acc = np.zeros(1 + p)

    def w_prior(row: np.ndarray) -> float:
        return -0.5 * float((row * row).sum())

    def scale_prior(value: float, hyper: float) -> float:
        # includes the log-scale random-walk Jacobian
        return _tau_log_hyperprior(value, hyper) + math.log(value)

    for it in range(mcmc.n_iter):
        adapting = it < mcmc.n_burn

        # trend block: random walk on log(b), with the log-normal Jacobian
        theta_prop = theta + scale_b.propose_offset(rng)
        b_prop = np.exp(theta_prop)
        mu_prop_vec = design_mu @ b_prop
        ll_prop = ll_from_lam(mu_prop_vec + row_sum)
        lpb_prop = logprior_b(b_prop)
        log_ratio = (ll_prop + lpb_prop + theta_prop.sum()) - (
            cur_ll + cur_lpb + theta.sum()
        )
        alpha = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
        if rng.random() < alpha:
            theta, b, mu_part = theta_prop, b_prop, mu_prop_vec
            cur_ll, cur_lpb = ll_prop, lpb_prop
            if not adapting:
                post_acc[0] += 1
        if not adapting:
            post_prop[0] += 1
        else:
            scale_b.observe(theta, alpha, it)

        # one standardized block per lag row; invalid proposals rejected
        for i in range(p):
            w_prop = w[i] + scale_w[i].propose_offset(rng)
            alpha = 0.0
            ll_prop = None
            row_scale = g * lam_loc[i]
            row_prop = row_scale * w_prop
            if not np.any(w_prop < 0.0):
                new_total = row_max.sum() - row_max[i] + row_prop.max()
                if new_total <= stability_cap:
                    new_col = contrib_col(row_prop, i)
                    ll_prop = ll_from_lam(mu_part + row_sum - contrib[:, i] + new_col)
                    diff = ll_prop - cur_ll + w_prior(w_prop) - w_prior(w[i])
                    alpha = 1.0 if diff >= 0 else math.exp(diff)
            if rng.random() < alpha:
                w[i] = w_prop
                c[i] = row_prop
                row_sum += new_col - contrib[:, i]
                contrib[:, i] = new_col
                row_max[i] = row_prop.max()
                cur_ll = ll_prop
                if not adapting:
                    post_acc[1 + i] += 1
            if not adapting:
                post_prop[1 + i] += 1
            else:
                scale_w[i].observe(w[i], alpha, it)

        # global block: joint random walk over (log b, w, log scales) with
        # an adapted covariance tracking all cross-correlations at once
        z = np.concatenate([theta, w.ravel(), np.log(lam_loc), [math.log(g)]])
        z_prop = z + scale_all.propose_offset(rng)
        theta_prop = z_prop[:k_mu]
        w_flat = z_prop[k_mu : k_mu + p * k_lag]
        alpha = 0.0
        accepted_state = None
        if not np.any(w_flat < 0.0):
            w_prop = w_flat.reshape(p, k_lag)
            lam_prop = np.exp(z_prop[k_mu + p * k_lag : -1])
            g_prop = math.exp(z_prop[-1])
            c_prop = g_prop * lam_prop[:, None] * w_prop
            if c_prop.max(axis=1).sum() <= stability_cap:
                b_prop = np.exp(theta_prop)
                mu_prop_vec = design_mu @ b_prop
                contrib_prop = (design_lag @ c_prop.T) * lagmat
                ll_prop = ll_from_lam(mu_prop_vec + contrib_prop.sum(axis=1))
                lpb_prop = logprior_b(b_prop)
                diff = (
                    (ll_prop + lpb_prop + theta_prop.sum())
                    - (cur_ll + cur_lpb + theta.sum())
                    + w_prior(w_prop.ravel()) - w_prior(w.ravel())
                    + sum(scale_prior(v, 1.0) for v in lam_prop)
                    - sum(scale_prior(v, 1.0) for v in lam_loc)
                    + scale_prior(g_prop, g0) - scale_prior(g, g0)
                )
                alpha = 1.0 if diff >= 0 else math.exp(diff)
                accepted_state = (theta_prop, b_prop, w_prop, lam_prop, g_prop,
                                  c_prop, ll_prop, lpb_prop, mu_prop_vec,
                                  contrib_prop)
        if rng.random() < alpha and accepted_state is not None:
            (theta, b, w, lam_loc, g, c, cur_ll, cur_lpb, mu_part,
             contrib) = accepted_state
            row_sum = contrib.sum(axis=1)
            row_max = c.max(axis=1)
        if adapting:
            z_now = np.concatenate([theta, w.ravel(), np.log(lam_loc), [math.log(g)]])
            scale_all.observe(z_now, alpha, it)

        # pairwise swap moves: trade level between two lag rows, leaving
        # the trend alone; lag regressors are mutually correlated, so this
        # direction is poorly served by single-row updates
        if p > 1:
            for i in range(p):
                k = int(rng.integers(p - 1))
                k += k >= i
                delta = float(scale_swap[i].propose_offset(rng)[0])
                wi_prop = w[i] + delta / (g * lam_loc[i])
                wk_prop = w[k] - delta / (g * lam_loc[k])
                alpha = 0.0
                ll_prop = None
                if not np.any(wi_prop < 0.0) and not np.any(wk_prop < 0.0):
                    row_i = g * lam_loc[i] * wi_prop
                    row_k = g * lam_loc[k] * wk_prop
                    new_total = (
                        row_max.sum() - row_max[i] - row_max[k]
                        + row_i.max() + row_k.max()
                    )
                    if new_total <= stability_cap:
                        col_i = contrib_col(row_i, i)
                        col_k = contrib_col(row_k, k)
                        ll_prop = ll_from_lam(
                            mu_part + row_sum
                            - contrib[:, i] - contrib[:, k] + col_i + col_k
                        )
                        diff = (
                            ll_prop - cur_ll
                            + w_prior(wi_prop) + w_prior(wk_prop)
                            - w_prior(w[i]) - w_prior(w[k])
                        )
                        alpha = 1.0 if diff >= 0 else math.exp(diff)
                if rng.random() < alpha:
                    w[i], w[k] = wi_prop, wk_prop
                    c[i], c[k] = row_i, row_k
                    row_sum += col_i - contrib[:, i] + col_k - contrib[:, k]
                    contrib[:, i] = col_i
                    contrib[:, k] = col_k
                    row_max[i], row_max[k] = row_i.max(), row_k.max()
                    cur_ll = ll_prop
                if adapting:
                    scale_swap[i].observe(np.array([c[i].sum()]), alpha, it)

        # compensated shear moves: shift one whole lag row while moving the
        # trend the opposite way, so the chain can traverse the weakly
        # identified trend-versus-lag ridge (symmetric volume-preserving
        # proposal)
        for i in range(p):
            delta = float(scale_comp[i].propose_offset(rng)[0])
            w_prop = w[i] + delta / (g * lam_loc[i])
            b_prop = b - delta * lag_level[:, i]
            alpha = 0.0
            ll_prop = lpb_prop = None
            if not np.any(w_prop < 0.0) and not np.any(b_prop <= 0.0):
                row_prop = g * lam_loc[i] * w_prop
                new_total = row_max.sum() - row_max[i] + row_prop.max()
                if new_total <= stability_cap:
                    new_col = contrib_col(row_prop, i)
                    mu_prop_vec = design_mu @ b_prop
                    ll_prop = ll_from_lam(
                        mu_prop_vec + row_sum - contrib[:, i] + new_col
                    )
                    lpb_prop = logprior_b(b_prop)
                    diff = (
                        (ll_prop + lpb_prop)
                        - (cur_ll + cur_lpb)
                        + w_prior(w_prop) - w_prior(w[i])
                    )
                    alpha = 1.0 if diff >= 0 else math.exp(diff)
            if rng.random() < alpha:
                w[i] = w_prop
                c[i] = row_prop
                row_sum += new_col - contrib[:, i]
                contrib[:, i] = new_col
                mu_part = mu_prop_vec
                row_max[i] = row_prop.max()
                b = b_prop
                theta = np.log(b)
                cur_ll, cur_lpb = ll_prop, lpb_prop
            if adapting:
                scale_comp[i].observe(np.array([c[i].sum()]), alpha, it)

        # local scale moves: rescaling a row together with its scale keeps
        # the standardized coordinates fixed, so there is no funnel between
        # "collapsed" and "released" rows
        for i in range(p):
            log_l = math.log(lam_loc[i])
            log_l_prop = min(max(log_l + float(scale_loc[i].propose_offset(rng)[0]),
                                 -16.0), 6.0)
            l_prop = math.exp(log_l_prop)
            row_prop = g * l_prop * w[i]
            alpha = 0.0
            ll_prop = None
            new_total = row_max.sum() - row_max[i] + row_prop.max()
            if new_total <= stability_cap:
                new_col = contrib_col(row_prop, i)
                ll_prop = ll_from_lam(mu_part + row_sum - contrib[:, i] + new_col)
                diff = (
                    ll_prop - cur_ll
                    + scale_prior(l_prop, 1.0) - scale_prior(lam_loc[i], 1.0)
                )
                alpha = 1.0 if diff >= 0 else math.exp(diff)
            if rng.random() < alpha:
                lam_loc[i] = l_prop
                c[i] = row_prop
                row_sum += new_col - contrib[:, i]
                contrib[:, i] = new_col
                row_max[i] = row_prop.max()
                cur_ll = ll_prop
            if adapting:
                scale_loc[i].observe(np.array([math.log(lam_loc[i])]), alpha, it)

        # global scale move: rescales every lag row at once
        log_g_prop = min(max(math.log(g) + float(scale_glob.propose_offset(rng)[0]),
                             -16.0), 4.0)
        g_prop = math.exp(log_g_prop)
        c_prop = g_prop * lam_loc[:, None] * w
        alpha = 0.0
        if c_prop.max(axis=1).sum() <= stability_cap:
            contrib_prop = (design_lag @ c_prop.T) * lagmat
            ll_prop = ll_from_lam(mu_part + contrib_prop.sum(axis=1))
            diff = (
                ll_prop - cur_ll
                + scale_prior(g_prop, g0) - scale_prior(g, g0)
            )
            alpha = 1.0 if diff >= 0 else math.exp(diff)
        if rng.random() < alpha:
            g = g_prop
            c = c_prop
            contrib = contrib_prop
            row_sum = contrib.sum(axis=1)
            row_max = c.max(axis=1)
            cur_ll = ll_prop
        if adapting:
            scale_glob.observe(np.array([math.log(g)]), alpha, it)

        if not adapting and (it - mcmc.n_burn) % mcmc.thin == mcmc.thin - 1:
            params = TvbarcParams(b=b.copy(), c=c.copy(), tau=lam_loc.copy(),
                                  tau_global=g)
            params.validate(spec.stability_margin)
            # refresh the caches and running likelihood from scratch so
            # incremental rounding cannot accumulate into stored densities
            contrib = (design_lag @ c.T) * lagmat
            row_sum = contrib.sum(axis=1)
            cur_ll = loglik(b, c)
            kept_b[kept] = params.b
            kept_c[kept] = params.c
            kept_tau[kept] = params.tau
            kept_g[kept] = g
            lp_rows = sum(
                _row_logprior(c[i], g * lam_loc[i])
                + _tau_log_hyperprior(lam_loc[i], 1.0)
                for i in range(p)
            ) + _tau_log_hyperprior(g, g0)
            kept_lp[kept] = cur_ll + cur_lpb + lp_rows
            kept += 1

    rates = {"b": float(post_acc[0] / post_prop[0])}
    for i in range(p):
        rates[f"c{i + 1}"] = float(post_acc[1 + i] / post_prop[1 + i])

    return PosteriorDraws(
        b=kept_b[:kept],
        c=kept_c[:kept],
        tau=kept_tau[:kept],
        tau_global=kept_g[:kept],
        log_post=kept_lp[:kept],
        accept_rates=rates,
        spec=spec,
        mcmc=mcmc,
        prior_scale=prior_scale,
        t_len=t_len,
        start_date=getattr(series, "start_date", None),
    )


@dataclass(eq=False)
class FitSummary:
    """Pointwise posterior means and 95% bands on the observation grid."""

    start_date: dt.date | None
    mu_mean: np.ndarray
    mu_lo: np.ndarray
    mu_hi: np.ndarray
    a_mean: np.ndarray  # (lag_order, T)
    a_lo: np.ndarray
    a_hi: np.ndarray
    ess_mu: np.ndarray
    ess_a: np.ndarray  # (lag_order, T)

    @property
    def t_len(self) -> int:
        return len(self.mu_mean)

    @property
    def lag_order(self) -> int:
        return self.a_mean.shape[0]

    def dates(self) -> list[str]:
        if self.start_date is None:
            return [str(t) for t in range(1, self.t_len + 1)]
        return [
            (self.start_date + dt.timedelta(days=t)).isoformat()
            for t in range(self.t_len)
        ]

    def to_csv(self, path) -> None:
        """Columns: date, mu_mean, mu_lo, mu_hi, then a{i}_mean/lo/hi per lag."""
        import csv as _csv

        header = ["date", "mu_mean", "mu_lo", "mu_hi"]
        for i in range(1, self.lag_order + 1):
            header += [f"a{i}_mean", f"a{i}_lo", f"a{i}_hi"]
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = _csv.writer(handle)
            writer.writerow(header)
            for t, date in enumerate(self.dates()):
                row = [date, repr(float(self.mu_mean[t])), repr(float(self.mu_lo[t])),
                       repr(float(self.mu_hi[t]))]
                for i in range(self.lag_order):
                    row += [
                        repr(float(self.a_mean[i, t])),
                        repr(float(self.a_lo[i, t])),
                        repr(float(self.a_hi[i, t])),
                    ]
                writer.writerow(row)

    def to_json(self, path) -> None:
        payload = {
            "start_date": self.start_date.isoformat() if self.start_date else None,
            "dates": self.dates(),
            "mu": {
                "mean": self.mu_mean.tolist(),
                "lo": self.mu_lo.tolist(),
                "hi": self.mu_hi.tolist(),
                "ess": self.ess_mu.tolist(),
            },
            "lags": [
                {
                    "lag": i + 1,
                    "mean": self.a_mean[i].tolist(),
                    "lo": self.a_lo[i].tolist(),
                    "hi": self.a_hi[i].tolist(),
                    "ess": self.ess_a[i].tolist(),
                }
                for i in range(self.lag_order)
            ],
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, sort_keys=True, indent=1)
            handle.write("\n")


def summarize(draws: PosteriorDraws) -> FitSummary:
    """Pointwise mean and empirical 2.5/97.5% quantiles of all curves.

    Curves are evaluated at every observed day, u = t/T for t = 1..T.
    """
    if len(draws) == 0:
        raise ValueError("no retained draws to summarize")
    spec = draws.spec
    t_len = draws.t_len
    basis_mu, basis_lag = model_bases(spec)
    u = np.arange(1, t_len + 1, dtype=np.float64) / t_len
    eval_mu = basis_mu.design_matrix(u)
    eval_lag = basis_lag.design_matrix(u)

    mu_curves = draws.b @ eval_mu.T  # (n_kept, T)
    mu_lo, mu_hi = np.quantile(mu_curves, [0.025, 0.975], axis=0)

    p = spec.lag_order
    a_mean = np.empty((p, t_len))
    a_lo = np.empty((p, t_len))
    a_hi = np.empty((p, t_len))
    ess_a = np.empty((p, t_len))
    for i in range(p):
        curves = draws.c[:, i, :] @ eval_lag.T
        a_mean[i] = curves.mean(axis=0)
        a_lo[i], a_hi[i] = np.quantile(curves, [0.025, 0.975], axis=0)
        ess_a[i] = effective_sample_size(curves)

    return FitSummary(
        start_date=draws.start_date,
        mu_mean=mu_curves.mean(axis=0),
        mu_lo=mu_lo,
        mu_hi=mu_hi,
        a_mean=a_mean,
        a_lo=a_lo,
        a_hi=a_hi,
        ess_mu=effective_sample_size(mu_curves),
        ess_a=ess_a,
    )


def effective_sample_size(draws) -> np.ndarray:
    """Autocorrelation-based ESS per column (Geyer initial monotone sequence).

    Accepts a (n_draws,) vector or (n_draws, m) matrix; returns a scalar
    array of shape () or (m,).  Capped at the draw count; constant columns
    report the full draw count.
    """
    x = np.asarray(draws, dtype=np.float64)
    scalar_input = x.ndim == 1
    if scalar_input:
        x = x[:, None]
    n, m = x.shape
    out = np.full(m, float(n))
    if n < 4:
        return out[0] if scalar_input else out

    centered = x - x.mean(axis=0)
    nfft = 1 << (2 * n - 1).bit_length()
    freq = np.fft.rfft(centered, n=nfft, axis=0)
    acov = np.fft.irfft(freq * np.conj(freq), n=nfft, axis=0)[:n].real / n

    for j in range(m):
        var0 = acov[0, j]
        if var0 <= 0:
            continue
        rho = acov[:, j] / var0
        total = 0.0
        prev_pair = math.inf
        k = 0
        while k + 1 < n:
            pair = rho[k] + rho[k + 1]
            if pair <= 0.0:
                break
            pair = min(pair, prev_pair)  # enforce monotone decrease
            total += pair
            prev_pair = pair
            k += 2
        tau = max(2.0 * total - 1.0, 1e-12)
        out[j] = min(float(n), n / tau)
    return out[0] if scalar_input else out
