"""Scenario configuration: one JSON document per invocation.

A scenario names a system (capacity, arrival rates, service-rate
profile, length law, discipline, variant), optional run parameters, and
the closed-form selectors to evaluate against it. Selector strings are
a fixed external interface:

  theorem2    occupancy law for shortest-remaining displacement,
              state-dependent rates, any profile
  corollary2  its constant-rate collapse on the per-job-rate-1/i profile
  eq4         oldest-or-shortest displacement with constant-length jobs
              on an occupancy-independent profile (the two rules
              coincide there)
  theorem5    oldest-job displacement under zero-inflated exponential
              lengths (a plain exponential law is the weight-1 case)
  erlang_b    arriving-job blocking on an occupancy-independent profile
  srl_tail    shortest-remaining displacement with every job served at
              the same rate, constant arrivals

Each selector carries admissibility rules tying it to the system shapes
for which its formula is valid; violations raise ConfigError naming the
offending requirement. All selectors describe capped (Limited) systems.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp

from .distributions import (
    ArrivalRates,
    Deterministic,
    Exponential,
    Hyperexponential,
    LengthDistribution,
    ZeroInflatedExponential,
)
from .formulas import (
    ServiceRateProfile,
    StateDistribution,
    egalitarian_srl_loss,
    erlang_b,
    fcfd_constant_loss,
    fcfd_zero_inflated_probs,
    limited_ps_probs,
    srl_nserver_probs,
)
from .simulate import Discipline, SystemSpec, Variant

SELECTORS = ("theorem2", "corollary2", "eq4", "theorem5", "erlang_b", "srl_tail")


class ConfigError(ValueError):
    """A scenario document that cannot be used, with the source and the
    field spelled out."""

    def __init__(self, message: str, source: str = "config", field: str | None = None):
        self.source = source
        self.field = field
        where = f"{source}: " + (f"field '{field}': " if field else "")
        super().__init__(where + message)


@dataclass(frozen=True)
class Scenario:
    name: str
    spec: SystemSpec
    formulas: tuple[str, ...]
    horizon: int | None
    warmup: int | None
    replications: int
    seed: int | None


def _reject_unknown(obj: dict, allowed: set[str], source: str, field: str | None):
    for key in obj:
        if key not in allowed:
            prefix = f"{field}." if field else ""
            raise ConfigError(
                f"unknown field (allowed: {', '.join(sorted(allowed))})",
                source, f"{prefix}{key}",
            )


def _number(value, source, field, minimum=None, strict_min=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", source, field)
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"must be finite, got {value!r}", source, field)
    if minimum is not None and v < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value!r}", source, field)
    if strict_min is not None and v <= strict_min:
        raise ConfigError(f"must be > {strict_min}, got {value!r}", source, field)
    return v

def _integer(value, source, field, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", source, field)
    if value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value!r}", source, field)
    return value


def parse_distribution(obj, source: str = "config",
                       field: str = "length_law") -> LengthDistribution:
    """A tagged length-law object: {"kind": ..., parameters...}."""
    if not isinstance(obj, dict):
        raise ConfigError(f"expected a tagged object, got {obj!r}", source, field)
    kind = obj.get("kind")
    if kind is None:
        raise ConfigError("missing 'kind' tag", source, field)
    try:
        if kind == "Deterministic":
            _reject_unknown(obj, {"kind", "b"}, source, field)
            if "b" not in obj:
                raise ConfigError("missing parameter", source, f"{field}.b")
            return Deterministic(_number(obj["b"], source, f"{field}.b"))
        if kind == "Exponential":
            _reject_unknown(obj, {"kind", "mu"}, source, field)
            if "mu" not in obj:
                raise ConfigError("missing parameter", source, f"{field}.mu")
            return Exponential(_number(obj["mu"], source, f"{field}.mu"))
        if kind == "ZeroInflatedExponential":
            _reject_unknown(obj, {"kind", "alpha", "mu"}, source, field)
            for p in ("alpha", "mu"):
                if p not in obj:
                    raise ConfigError("missing parameter", source, f"{field}.{p}")
            return ZeroInflatedExponential(
                _number(obj["alpha"], source, f"{field}.alpha"),
                _number(obj["mu"], source, f"{field}.mu"),
            )
        if kind == "Hyperexponential":
            _reject_unknown(obj, {"kind", "branches", "mean", "scv"}, source, field)
            if "branches" in obj:
                raw = obj["branches"]
                if not isinstance(raw, list) or not raw:
                    raise ConfigError("expected a nonempty list of [weight, rate] pairs",
                                      source, f"{field}.branches")
                branches = []
                for i, pair in enumerate(raw):
                    if not isinstance(pair, list) or len(pair) != 2:
                        raise ConfigError("expected a [weight, rate] pair",
                                          source, f"{field}.branches[{i}]")
                    branches.append((
                        _number(pair[0], source, f"{field}.branches[{i}][0]"),
                        _number(pair[1], source, f"{field}.branches[{i}][1]"),
                    ))
                return Hyperexponential(tuple(branches))
            if "mean" in obj and "scv" in obj:
                return Hyperexponential.from_mean_scv(
                    _number(obj["mean"], source, f"{field}.mean"),
                    _number(obj["scv"], source, f"{field}.scv"),
                )
            raise ConfigError("needs either 'branches' or 'mean' and 'scv'",
                              source, field)
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(str(e), source, field) from e
    raise ConfigError(
        f"unknown kind {kind!r} (one of Deterministic, Exponential, "
        f"ZeroInflatedExponential, Hyperexponential)", source, f"{field}.kind")


def _parse_profile(obj, n: int, source: str) -> ServiceRateProfile:
    field = "profile"
    if obj is None or obj == "egalitarian":
        return ServiceRateProfile.egalitarian(n)
    if obj == "equal":
        return ServiceRateProfile.equal(n)
    if isinstance(obj, list):
        if len(obj) != n:
            raise ConfigError(f"expected {n} per-job rates, got {len(obj)}",
                              source, field)
        return ServiceRateProfile(tuple(
            _number(x, source, f"{field}[{i}]", strict_min=0.0)
            for i, x in enumerate(obj)
        ))
    raise ConfigError(
        f"expected 'egalitarian', 'equal', or a list of {n} rates, got {obj!r}",
        source, field)


def _parse_rates(obj, n: int, source: str) -> ArrivalRates:
    field = "rates"
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return ArrivalRates.constant(_number(obj, source, field, minimum=0.0), n)
    if isinstance(obj, list):
        if len(obj) != n + 1:
            raise ConfigError(
                f"expected {n + 1} rates (levels 0..{n}), got {len(obj)}",
                source, field)
        return ArrivalRates(tuple(
            _number(x, source, f"{field}[{i}]", minimum=0.0)
            for i, x in enumerate(obj)
        ))
    raise ConfigError(
        f"expected a rate or a list of {n + 1} rates, got {obj!r}", source, field)


_SCENARIO_FIELDS = {
    "name", "n", "rates", "length_law", "profile", "discipline", "variant",
    "formulas", "horizon", "warmup", "replications", "seed",
}


def parse_scenario(obj, source: str = "config") -> Scenario:
    if not isinstance(obj, dict):
        raise ConfigError(f"expected a JSON object, got {type(obj).__name__}", source)
    _reject_unknown(obj, _SCENARIO_FIELDS, source, None)
    for required in ("n", "rates", "length_law", "discipline"):
        if required not in obj:
            raise ConfigError("missing required field", source, required)

    name = obj.get("name", "scenario")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"expected a nonempty string, got {name!r}", source, "name")
    n = _integer(obj["n"], source, "n", minimum=1)
    rates = _parse_rates(obj["rates"], n, source)
    law = parse_distribution(obj["length_law"], source)
    profile = _parse_profile(obj.get("profile"), n, source)

    disc_raw = obj["discipline"]
    try:
        discipline = Discipline(disc_raw)
    except ValueError:
        raise ConfigError(
            f"unknown discipline {disc_raw!r} (one of "
            f"{', '.join(d.value for d in Discipline)})", source, "discipline")
    var_raw = obj.get("variant", Variant.LIMITED.value)
    try:
        variant = Variant(var_raw)
    except ValueError:
        raise ConfigError(
            f"unknown variant {var_raw!r} (one of "
            f"{', '.join(v.value for v in Variant)})", source, "variant")

    try:
        spec = SystemSpec(n, rates, profile, law, discipline, variant)
    except ValueError as e:
        raise ConfigError(str(e), source) from e

    raw_formulas = obj.get("formulas", [])
    if not isinstance(raw_formulas, list):
        raise ConfigError(f"expected a list, got {raw_formulas!r}", source, "formulas")
    formulas = []
    for i, sel in enumerate(raw_formulas):
        if not isinstance(sel, str):
            raise ConfigError(f"expected a selector string, got {sel!r}",
                              source, f"formulas[{i}]")
        check_admissible(sel, spec, source=source, field=f"formulas[{i}]")
        formulas.append(sel)

    horizon = warmup = seed = None
    if "horizon" in obj:
        horizon = _integer(obj["horizon"], source, "horizon", minimum=1)
    if "warmup" in obj:
        warmup = _integer(obj["warmup"], source, "warmup", minimum=0)
        if horizon is not None and warmup >= horizon:
            raise ConfigError(f"must be below horizon {horizon}, got {warmup}",
                              source, "warmup")
    replications = _integer(obj.get("replications", 1), source, "replications",
                            minimum=1)
    if "seed" in obj:
        seed = _integer(obj["seed"], source, "seed", minimum=0)
        if seed >= 2**64:
            raise ConfigError("must fit in 64 bits", source, "seed")

    return Scenario(name, spec, tuple(formulas), horizon, warmup, replications, seed)


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read: {e.strerror or e}", str(path)) from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}",
            str(path)) from e
    return parse_scenario(obj, source=str(path))


# ---------------------------------------------------------------------------
# selector admissibility and evaluation


def _is_equal_profile(profile: ServiceRateProfile) -> bool:
    return len(set(profile.c)) == 1


def _is_egalitarian_profile(profile: ServiceRateProfile) -> bool:
    return profile.c == ServiceRateProfile.egalitarian(profile.capacity).c


def check_admissible(selector: str, spec: SystemSpec,
                     source: str = "config", field: str = "formulas") -> None:
    """Raise ConfigError unless the selector's formula applies to the
    configured system."""

    def bad(requirement: str):
        raise ConfigError(f"'{selector}' requires {requirement}", source, field)

    if selector not in SELECTORS:
        raise ConfigError(
            f"unknown formula selector {selector!r} (one of {', '.join(SELECTORS)})",
            source, field)
    if spec.variant is not Variant.LIMITED:
        bad("the Limited variant")
    law = spec.length_law

    if selector == "theorem2":
        if spec.discipline is not Discipline.SRL_LOSS:
            bad("the SrlLoss discipline")
    elif selector == "corollary2":
        if spec.discipline is not Discipline.SRL_LOSS:
            bad("the SrlLoss discipline")
        if not spec.rates.is_constant:
            bad("a constant arrival rate")
        if not _is_egalitarian_profile(spec.profile):
            bad("the egalitarian profile (per-job rate 1/i)")
    elif selector == "eq4":
        if spec.discipline not in (Discipline.SRL_LOSS, Discipline.FCFD_DISPLACE):
            bad("the SrlLoss or FcfdDisplace discipline")
        if not isinstance(law, Deterministic):
            bad("Deterministic job lengths")
        if not spec.rates.is_constant:
            bad("a constant arrival rate")
        if not _is_equal_profile(spec.profile):
            bad("an occupancy-independent (equal) profile")
    elif selector == "theorem5":
        if spec.discipline is not Discipline.FCFD_DISPLACE:
            bad("the FcfdDisplace discipline")
        if not isinstance(law, (ZeroInflatedExponential, Exponential)):
            bad("ZeroInflatedExponential (or Exponential) job lengths")
    elif selector == "erlang_b":
        if spec.discipline is not Discipline.BLOCK_ARRIVING:
            bad("the BlockArriving discipline")
        if not spec.rates.is_constant:
            bad("a constant arrival rate")
        if not _is_equal_profile(spec.profile):
            bad("an occupancy-independent (equal) profile")
    elif selector == "srl_tail":
        if spec.discipline is not Discipline.SRL_LOSS:
            bad("the SrlLoss discipline")
        if not spec.rates.is_constant:
            bad("a constant arrival rate")
        if not _is_equal_profile(spec.profile):
            bad("an occupancy-independent (equal) profile")


@dataclass(frozen=True)
class AnalyticResult:
    """One selector evaluated on one system: occupancy, loss, mean level
    L, and mean per-arrival time in system V = L / (average arrival
    rate), with lost arrivals contributing zero time."""

    selector: str
    dist: StateDistribution
    loss: float
    mean_level: float
    sojourn: float | None


def _truncated_poisson(n: int, rho: float) -> StateDistribution:
    if rho == 0.0:
        return StateDistribution((1.0,) + (0.0,) * n)
    i = np.arange(n + 1)
    log_t = i * math.log(rho) - gammaln(i + 1)
    return StateDistribution(tuple(np.exp(log_t - logsumexp(log_t))))


def evaluate_selector(selector: str, spec: SystemSpec) -> AnalyticResult:
    """Evaluate one admissible selector on the system."""
    check_admissible(selector, spec)
    n = spec.n
    law = spec.length_law
    b = law.mean()
    lam0 = spec.rates.at(0)

    if selector == "theorem2":
        dist = limited_ps_probs(n, spec.rates, b, spec.profile)
        loss = dist.loss
    elif selector == "corollary2":
        dist = limited_ps_probs(n, spec.rates, b, spec.profile)
        loss = egalitarian_srl_loss(n, lam0, b)
    elif selector == "eq4":
        scaled = b / spec.profile.rate_at(1)
        dist = srl_nserver_probs(n, lam0, scaled)
        loss = fcfd_constant_loss(n, lam0, scaled)
    elif selector == "theorem5":
        if isinstance(law, Exponential):
            alpha, mu = 1.0, law.mu
        else:
            alpha, mu = law.alpha, law.mu
        dist = fcfd_zero_inflated_probs(n, spec.rates, alpha, mu, spec.profile)
        loss = dist.loss
    elif selector == "erlang_b":
        rho = lam0 * b / spec.profile.rate_at(1)
        dist = _truncated_poisson(n, rho)
        loss = erlang_b(n, rho)
    else:  # srl_tail
        dist = srl_nserver_probs(n, lam0, b / spec.profile.rate_at(1))
        loss = dist.loss

    mean_level = math.fsum(i * p for i, p in enumerate(dist.p))
    lam_bar = math.fsum(spec.rates.at(i) * p for i, p in enumerate(dist.p))
    sojourn = mean_level / lam_bar if lam_bar > 0 else None
    return AnalyticResult(selector, dist, loss, mean_level, sojourn)
