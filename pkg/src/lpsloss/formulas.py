"""Closed-form stationary distributions and loss probabilities.

Covers processor-sharing loss systems with a hard cap of n jobs where an
arrival finding the system full displaces one job (the one with the
shortest remaining length, or the oldest one, depending on discipline),
plus the classic blocking baseline. All heavy expressions are carried in
log space so that results stay finite and accurate up to the documented
range limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln, logsumexp

from .distributions import ArrivalRates, LengthDistribution

__all__ = [
    "ServiceRateProfile",
    "RhoProfile",
    "StateDistribution",
    "poisson_tail",
    "srl_nserver_probs",
    "unlimited_ps_probs",
    "truncate_unlimited",
    "limited_ps_rhos",
    "limited_ps_probs",
    "egalitarian_srl_loss",
    "fcfd_constant_loss",
    "fcfd_zero_inflated_rhos",
    "fcfd_zero_inflated_probs",
    "rho_n_from_lst",
    "erlang_b",
    "little_sojourn",
    "slow_service_loss_limit",
]

#: Largest n*rho the displacement formulas accept. The exponential factor
#: in the top-state weight reaches the extreme float range here, so larger
#: arguments are rejected instead of returned with silent precision loss.
RANGE_LIMIT = 700.0

_SUM_TOL = 1e-10
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class ServiceRateProfile:
    """Per-job service rates c_1..c_n, indexed by occupancy level.

    With i jobs present each job is served at rate c_i. Levels beyond n
    reuse c_n, which is how the uncapped companion system behaves.
    """

    c: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.c)
        object.__setattr__(self, "c", c)
        if not c:
            raise ValueError("need at least one service rate")
        if any(x <= 0 for x in c):
            raise ValueError("service rates must be positive")

    @classmethod
    def egalitarian(cls, n: int) -> "ServiceRateProfile":
        """Total service effort 1 split evenly: c_i = 1/i."""
        if n < 1:
            raise ValueError("capacity must be at least 1")
        return cls(tuple(1.0 / i for i in range(1, n + 1)))

    @classmethod
    def equal(cls, n: int, rate: float = 1.0) -> "ServiceRateProfile":
        """Every job served at the same rate regardless of occupancy."""
        if n < 1:
            raise ValueError("capacity must be at least 1")
        return cls((float(rate),) * n)

    @property
    def capacity(self) -> int:
        return len(self.c)

    def rate_at(self, i: int) -> float:
        """Per-job rate with i >= 1 jobs present; levels past n reuse c_n."""
        if i < 1:
            raise ValueError("occupancy level must be at least 1")
        return self.c[min(i, len(self.c)) - 1]


@dataclass(frozen=True)
class RhoProfile:
    """Traffic intensities rho_1..rho_n for the occupancy chain."""

    rho: tuple[float, ...]

    def __post_init__(self):
        rho = tuple(float(x) for x in self.rho)
        object.__setattr__(self, "rho", rho)
        if not rho:
            raise ValueError("need at least one intensity")
        if any(x < 0 for x in rho):
            raise ValueError("intensities must be nonnegative")

    @property
    def rho_top(self) -> float:
        return self.rho[-1]


@dataclass(frozen=True)
class StateDistribution:
    """Stationary occupancy probabilities p_0..p_n; p_n doubles as the
    loss probability for the capped system."""

    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) < 2:
            raise ValueError("need probabilities for levels 0..n with n >= 1")
        cleaned = []
        for i, x in enumerate(p):
            if x < -_EDGE_TOL or x > 1.0 + _EDGE_TOL:
                raise ValueError(f"p_{i} = {x} is not a probability")
            cleaned.append(min(max(x, 0.0), 1.0))
        total = math.fsum(cleaned)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "p", tuple(cleaned))

    @property
    def n(self) -> int:
        return len(self.p) - 1

    @property
    def loss(self) -> float:
        return self.p[-1]

    def as_array(self) -> np.ndarray:
        return np.array(self.p)


def _check_capacity(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"capacity must be an integer >= 1, got {n!r}")


def poisson_tail(k: int, m: float) -> float:
    """P(N >= k) for N Poisson with mean m."""
    if k <= 0:
        return 1.0
    if m < 0:
        raise ValueError("mean must be nonnegative")
    return float(gammainc(k, m))


def srl_nserver_probs(n: int, lam: float, b: float) -> StateDistribution:
    """Occupancy law when each of up to n jobs is served at unit rate and
    a full system sheds the job with the shortest remaining length.

    The head is Poisson(lam*b) and the top state absorbs the tail, so the
    loss probability is the upper Poisson tail at n.
    """
    _check_capacity(n)
    if lam < 0:
        raise ValueError("arrival rate must be nonnegative")
    if not b > 0:
        raise ValueError("mean length must be positive")
    m = lam * b
    i = np.arange(n)
    if m == 0:
        head = np.zeros(n)
        head[0] = 1.0
    else:
        head = np.exp(-m + i * math.log(m) - gammaln(i + 1))
    return StateDistribution(tuple(head) + (poisson_tail(n, m),))


def _log_head(rhos: np.ndarray) -> np.ndarray:
    """log of the cumulative products 1, rho_1, rho_1*rho_2, ... with a
    -inf entry wherever the product has hit an exact zero."""
    with np.errstate(divide="ignore"):
        logs = np.log(rhos)
    return np.concatenate(([0.0], np.cumsum(logs)))


def _log_poisson_tail(n: int, m: float) -> float:
    """log P(N >= n) for N Poisson with mean m > 0. Falls back to the
    leading-term expansion when the tail underflows double range."""
    g = float(gammainc(n, m))
    if g > 1e-280:
        return math.log(g)
    return -m + n * math.log(m) - gammaln(n + 1)


def _log_top_weight(log_t: np.ndarray, n: int, rho: float) -> float:
    """log of the top-state weight: the full product rho_1..rho_n scaled
    by n!/(n*rho)^n times (e^{n*rho} - partial Poisson sum), resummed as
    e^{n*rho} * P(N >= n) for stability."""
    if rho == 0.0 or log_t[n] == -math.inf:
        return -math.inf
    m = n * rho
    return (
        log_t[n]
        + gammaln(n + 1)
        - n * math.log(m)
        + m
        + _log_poisson_tail(n, m)
    )


def limited_ps_rhos(
    n: int, rates: ArrivalRates, b: float, profile: ServiceRateProfile
) -> RhoProfile:
    """Traffic intensities rho_i = lambda_i * b / (i * c_i) for the
    displacement system with mean job length b."""
    _check_capacity(n)
    if not b > 0:
        raise ValueError("mean length must be positive")
    if profile.capacity != n:
        raise ValueError(
            f"profile has {profile.capacity} rates but capacity is {n}"
        )
    return RhoProfile(
        tuple(rates.at(i) * b / (i * profile.rate_at(i)) for i in range(1, n + 1))
    )


def limited_ps_probs(
    n: int, rates: ArrivalRates, b: float, profile: ServiceRateProfile
) -> StateDistribution:
    """Stationary occupancy for the capped processor-sharing system with
    state-dependent Poisson arrivals and shortest-remaining-length
    displacement.

    Only the mean job length enters; the law itself does not. Raises for
    n*rho beyond RANGE_LIMIT.
    """
    rp = limited_ps_rhos(n, rates, b, profile)
    rhos = np.array(rp.rho)
    rho = rp.rho_top
    if n * rho > RANGE_LIMIT:
        raise ValueError(
            f"n*rho = {n * rho:g} exceeds the supported range ({RANGE_LIMIT:g})"
        )
    log_t = _log_head(rhos)
    log_w = _log_top_weight(log_t, n, rho)
    log_z = logsumexp(np.concatenate((log_t[:n], [log_w])))
    with np.errstate(invalid="ignore"):
        head = np.exp(log_t[:n] - log_z)
    top = math.exp(log_w - log_z) if log_w > -math.inf else 0.0
    return StateDistribution(tuple(head) + (top,))


def unlimited_ps_probs(
    rates: ArrivalRates, b: float, profile: ServiceRateProfile, i: int
) -> float:
    """Stationary probability of i jobs in the uncapped companion system,
    where levels past n serve every job at rate c_n.

    The tail is factorially damped, so the normalizing sum converges for
    every rate profile; it is evaluated by the same closed resummation
    that the capped system uses for its top state.
    """
    if i < 0:
        raise ValueError("state index must be nonnegative")
    if not b > 0:
        raise ValueError("mean length must be positive")
    n = profile.capacity
    rp = limited_ps_rhos(n, rates, b, profile)
    rhos = np.array(rp.rho)
    rho = rp.rho_top
    log_t = _log_head(rhos)
    log_w = _log_top_weight(log_t, n, rho)
    log_z = logsumexp(np.concatenate((log_t[:n], [log_w])))
    if i <= n:
        log_ti = log_t[i]
    elif rho == 0.0 or log_t[n] == -math.inf:
        return 0.0
    else:
        m = n * rho
        log_ti = log_t[n] + (i - n) * math.log(m) + gammaln(n + 1) - gammaln(i + 1)
    if log_ti == -math.inf:
        return 0.0
    return float(math.exp(log_ti - log_z))


def truncate_unlimited(unlimited_head) -> StateDistribution:
    """Fold the uncapped system's probabilities at and above n into a
    single top state: the capped law is the head plus its complement."""
    head = [float(x) for x in unlimited_head]
    if not head:
        raise ValueError("head must contain the probabilities for levels 0..n-1")
    if any(x < 0 for x in head):
        raise ValueError("head entries must be nonnegative")
    total = math.fsum(head)
    if total > 1.0 + _SUM_TOL:
        raise ValueError(f"head sums to {total!r}, above 1")
    return StateDistribution(tuple(head) + (max(0.0, 1.0 - total),))


def egalitarian_srl_loss(n: int, lam: float, b: float) -> float:
    """Loss probability for the capped system with constant arrival rate
    and the egalitarian profile c_i = 1/i, in closed form.

    Agrees with limited_ps_probs(...).loss to high precision; this route
    exists because the single-rate case collapses to one stable ratio.
    """
    _check_capacity(n)
    if lam < 0:
        raise ValueError("arrival rate must be nonnegative")
    if not b > 0:
        raise ValueError("mean length must be positive")
    a = lam * b
    if n * a > RANGE_LIMIT:
        raise ValueError(
            f"n*lam*b = {n * a:g} exceeds the supported range ({RANGE_LIMIT:g})"
        )
    if a == 0:
        return 0.0
    m = n * a
    log_num = m + _log_poisson_tail(n, m)
    i = np.arange(n)
    log_geo = logsumexp(i * math.log(a)) if a != 1.0 else math.log(n)
    log_den_head = n * math.log(n) - gammaln(n + 1) + log_geo
    return float(math.exp(log_num - logsumexp([log_den_head, log_num])))


def fcfd_constant_loss(n: int, lam: float, b: float) -> float:
    """Loss probability when every job has length exactly b, each of up
    to n jobs is served at unit rate, and a full system displaces the
    oldest job: an arrival survives iff fewer than n jobs arrive during
    its service time, so the loss is the upper Poisson tail at n."""
    _check_capacity(n)
    if lam < 0:
        raise ValueError("arrival rate must be nonnegative")
    if not b > 0:
        raise ValueError("length must be positive")
    return poisson_tail(n, lam * b)


def fcfd_zero_inflated_rhos(
    n: int, rates: ArrivalRates, alpha: float, mu: float, profile: ServiceRateProfile
) -> RhoProfile:
    """Traffic intensities for oldest-job displacement under the
    zero-inflated exponential length law (zero with probability 1-alpha,
    else exponential with rate mu).

    Below the cap only the positive-length thinning matters; at the cap a
    full period also ends when a zero-length job arrives and bumps the
    oldest one, which adds (1-alpha)*lambda_n to the drain rate.
    """
    _check_capacity(n)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"zero-inflation needs 0 < alpha <= 1, got {alpha}")
    if not mu > 0:
        raise ValueError("rate must be positive")
    if profile.capacity != n:
        raise ValueError(
            f"profile has {profile.capacity} rates but capacity is {n}"
        )
    rho = [
        alpha * rates.at(i) / (i * profile.rate_at(i) * mu) for i in range(1, n)
    ]
    lam_n = rates.at(n)
    rho.append(alpha * lam_n / ((1.0 - alpha) * lam_n + n * profile.rate_at(n) * mu))
    return RhoProfile(tuple(rho))


def fcfd_zero_inflated_probs(
    n: int, rates: ArrivalRates, alpha: float, mu: float, profile: ServiceRateProfile
) -> StateDistribution:
    """Stationary occupancy for oldest-job displacement under the
    zero-inflated exponential length law: a finite birth-death product
    over the intensities from fcfd_zero_inflated_rhos."""
    rp = fcfd_zero_inflated_rhos(n, rates, alpha, mu, profile)
    log_t = _log_head(np.array(rp.rho))
    log_z = logsumexp(log_t)
    with np.errstate(invalid="ignore"):
        p = np.exp(log_t - log_z)
    p[log_t == -math.inf] = 0.0
    return StateDistribution(tuple(p))


def rho_n_from_lst(
    dist: LengthDistribution, lam_n: float, n: int, c_n: float
) -> float:
    """Top-state intensity from the length law's transform.

    beta is the transform of the job length divided by the full-system
    service speed n*c_n, evaluated at the top arrival rate; the intensity
    is (1 - beta)/beta. For the zero-inflated exponential law this equals
    the closed form used by fcfd_zero_inflated_rhos; for n = 1 it is
    valid for any length law.
    """
    _check_capacity(n)
    if lam_n < 0:
        raise ValueError("arrival rate must be nonnegative")
    if not c_n > 0:
        raise ValueError("service rate must be positive")
    beta = dist.lst(lam_n / (n * c_n))
    if beta <= 0:
        raise ValueError(f"transform value {beta} is not positive; singular input")
    return (1.0 - beta) / beta


def erlang_b(n: int, rho: float) -> float:
    """Blocking probability for n servers offered load rho, via the
    stable upward recursion B_0 = 1, B_k = rho*B/(k + rho*B)."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"server count must be an integer >= 0, got {n!r}")
    if rho < 0:
        raise ValueError("offered load must be nonnegative")
    b = 1.0
    for k in range(1, n + 1):
        b = rho * b / (k + rho * b)
    return b


def little_sojourn(dist: StateDistribution, lam: float) -> tuple[float, float]:
    """Mean number in system L and mean sojourn time V = L/lam for a
    constant arrival rate lam > 0."""
    if not lam > 0:
        raise ValueError("arrival rate must be positive")
    L = math.fsum(i * p for i, p in enumerate(dist.p))
    return L, L / lam


def slow_service_loss_limit(
    n: int, rates: ArrivalRates, alpha: float, profile: ServiceRateProfile
) -> float:
    """Loss probability in the slow-service limit (mu -> 0) under the
    zero-inflated exponential law: every intensity below the cap blows
    up while the top one tends to alpha/(1-alpha), so the loss tends to
    alpha regardless of the rates."""
    _check_capacity(n)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"zero-inflation needs 0 < alpha <= 1, got {alpha}")
    if profile.capacity != n:
        raise ValueError(
            f"profile has {profile.capacity} rates but capacity is {n}"
        )
    return alpha
