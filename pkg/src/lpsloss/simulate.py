"""Event-driven simulation of processor-sharing loss systems.

Covers the capped system (at most n jobs, with a displacement or
blocking rule when full) and its uncapped companion (levels past n keep
serving every job at the top per-job rate), plus a coupled run that
drives both from one input sequence and checks the level identity
X_capped(t) = min(X_uncapped(t), n) event by event.

Time bookkeeping: while any jobs are present, every one of them drains
at the same per-job rate, so the engine tracks a single global service
coordinate S(t), the integral of that rate. A job admitted at
coordinate s with length l finishes exactly when S reaches s + l, and
its remaining length at any moment is (s + l) - S. Each job therefore
stores one finish coordinate, fixed at admission: no per-job updates
between events, no accumulation of subtraction error over long runs,
and ordering jobs by remaining length is ordering them by that
coordinate.
"""

from __future__ import annotations

import math
from bisect import insort
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats as sstats

from .distributions import ArrivalRates, LengthDistribution
from .formulas import ServiceRateProfile
from .randomness import DEFAULT_SEED, substream_pair

__all__ = [
    "Discipline",
    "Variant",
    "SystemSpec",
    "Job",
    "Event",
    "Admitted",
    "ArrivingLost",
    "DisplacedLost",
    "SimState",
    "SimEstimates",
    "CouplingReport",
    "CouplingViolation",
    "IdleComparison",
    "advance_to_next_event",
    "apply_arrival",
    "run",
    "run_reference",
    "run_coupled",
    "compare_idle_periods",
]

N_BATCHES = 30
MIN_IDLE_SAMPLES = 500
_TRACE_WINDOW = 25


class Discipline(Enum):
    """What happens when an arrival finds the capped system full."""

    SRL_LOSS = "SrlLoss"            # shortest remaining length is lost
    FCFD_DISPLACE = "FcfdDisplace"  # oldest job is displaced
    BLOCK_ARRIVING = "BlockArriving"  # the arrival itself is turned away


class Variant(Enum):
    LIMITED = "Limited"
    UNLIMITED_CAPPED = "UnlimitedCapped"


@dataclass(frozen=True)
class SystemSpec:
    """Complete description of one simulated system."""

    n: int
    rates: ArrivalRates
    profile: ServiceRateProfile
    length_law: LengthDistribution
    discipline: Discipline = Discipline.SRL_LOSS
    variant: Variant = Variant.LIMITED

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"capacity must be an integer >= 1, got {self.n!r}")
        if self.rates.capacity != self.n:
            raise ValueError(
                f"need arrival rates for levels 0..{self.n}, "
                f"got {self.rates.capacity + 1} entries"
            )
        if self.profile.capacity != self.n:
            raise ValueError(
                f"need service rates for levels 1..{self.n}, "
                f"got {self.profile.capacity} entries"
            )


@dataclass
class Job:
    """One job in the reference engine. `attained` is materialized from
    the service coordinate on every advance, never decremented."""

    id: int
    arrival_time: float
    total_length: float
    attained: float = 0.0
    admit_coord: float = math.nan

    @property
    def remaining(self) -> float:
        return self.total_length - self.attained


@dataclass(frozen=True)
class Event:
    kind: str  # "arrival" | "completion"
    time: float
    job_id: int | None = None


@dataclass(frozen=True)
class Admitted:
    job_id: int


@dataclass(frozen=True)
class ArrivingLost:
    job_id: int


@dataclass(frozen=True)
class DisplacedLost:
    victim_id: int
    job_id: int


@dataclass
class SimEstimates:
    """Point estimates and uncertainty from one run.

    `counts` covers arrivals after the warm-up cut; `totals` covers the
    whole run and satisfies, exactly and in integers,
    arrivals = served + displaced + blocked + end_level.
    """

    n: int
    occupancy: tuple[float, ...]
    occupancy_ci_half: tuple[float, ...]
    seen: tuple[float, ...]
    loss_prob: float
    loss_ci_half: float
    sojourn_served: float
    sojourn_displaced: float
    sojourn_all: float
    idle_periods: np.ndarray
    counts: dict[str, int]
    totals: dict[str, int]
    horizon_time: float
    warmup_time: float

    def conservation_gap(self) -> int:
        t = self.totals
        return t["arrivals"] - (
            t["served"] + t["displaced"] + t["blocked"] + t["end_level"]
        )


class CouplingViolation(AssertionError):
    """The capped/uncapped level identity failed on a sample path."""

    def __init__(self, message: str, time: float, trace: list[str]):
        super().__init__(message)
        self.time = time
        self.trace = trace


@dataclass
class CouplingReport:
    n: int
    events: int
    arrivals: int
    completions: int
    duration: float
    occupancy_capped: tuple[float, ...]
    occupancy_uncapped: tuple[float, ...]
    max_uncapped_level: int
    checks: int
    violations: int = 0


@dataclass(frozen=True)
class IdleComparison:
    statistic: float
    p_value: float
    passed: bool
    reference: tuple[tuple[float, float, bool], ...] | None = None


# ---------------------------------------------------------------------------
# random-input plumbing shared by the fast loop and the reference engine


class _DrawBuffer:
    """Scalar standard-exponential draws served from pre-drawn blocks,
    so code that takes one value at a time consumes the generator
    exactly like block-drawing code."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._buf = rng.standard_exponential(block)
        self._i = 0

    def next_exp(self) -> float:
        if self._i == len(self._buf):
            self._buf = self._rng.standard_exponential(self._block)
            self._i = 0
        v = self._buf[self._i]
        self._i += 1
        return float(v)


def _draw_inputs(spec: SystemSpec, horizon: int, seed: int, stream: int):
    """Arrival machinery and the full length block for one run.

    Returns (arrival_times or None, gap buffer or None, lengths).
    Constant-rate input is one pre-drawn cumulative-sum array; state-
    dependent input redraws the remaining wait whenever the level
    changes, which memorylessness makes distribution-identical.
    """
    gap_rng, len_rng = substream_pair(seed, stream)
    lengths = spec.length_law.sample_block(len_rng, horizon)
    if spec.rates.is_constant:
        lam = spec.rates.at(0)
        if lam > 0:
            times = np.cumsum(gap_rng.standard_exponential(horizon)) / lam
        else:
            times = np.full(horizon, np.inf)
        return times, None, lengths
    return None, _DrawBuffer(gap_rng), lengths


# ---------------------------------------------------------------------------
# fast production loop


def run(
    spec: SystemSpec,
    horizon: int,
    warmup: int | None = None,
    seed: int = DEFAULT_SEED,
    stream: int = 0,
    trace: list | None = None,
) -> SimEstimates:
    """Simulate `horizon` arrivals and estimate stationary quantities.

    `warmup` arrivals (default: 10% of the horizon) are burned before
    metric collection starts. Identical (spec, horizon, warmup, seed,
    stream) give a bit-identical event sequence. Pass a list as `trace`
    to capture one record per event.

    Zero-length jobs are admitted and depart instantly (they count as
    served with sojourn zero); at capacity they are turned away under
    SrlLoss and BlockArriving, while under FcfdDisplace they displace
    the oldest job and then leave, dropping the level by one.
    """
    if not isinstance(horizon, (int, np.integer)) or horizon < 1:
        raise ValueError(f"horizon must be a positive arrival count, got {horizon!r}")
    if warmup is None:
        warmup = horizon // 10
    if not 0 <= warmup < horizon:
        raise ValueError(f"need 0 <= warmup < horizon, got warmup={warmup!r}")

    n = spec.n
    limited = spec.variant is Variant.LIMITED
    disc = spec.discipline
    prof = spec.profile.c
    arrival_times, gap_buf, lengths = _draw_inputs(spec, horizon, seed, stream)

    t = 0.0
    coord = 0.0  # service coordinate S(t)
    jobs: list[tuple[float, int, float]] = []  # (finish_coord, id, admit_time)
    level = 0

    occ = np.zeros(n + 1)
    seen = np.zeros(n + 1)
    idle_periods: list[float] = []
    idle_start = 0.0
    # whole-run counters (conservation), then post-warmup counters
    served_a = displaced_a = blocked_a = 0
    served_m = displaced_m = blocked_m = 0
    soj_served = soj_displaced = 0.0
    losses_m = 0

    measuring = warmup == 0
    snap_t: list[float] = []
    snap_occ: list[np.ndarray] = []
    snap_loss: list[int] = []
    if measuring:
        snap_t.append(0.0)
        snap_occ.append(occ.copy())
        snap_loss.append(0)
    batch = (horizon - warmup) // N_BATCHES
    boundaries = (
        [warmup + j * batch for j in range(1, N_BATCHES + 1)] if batch > 0 else []
    )
    next_boundary = boundaries[0] if boundaries else None
    boundary_idx = 0

    # next-arrival state for the state-dependent case
    if arrival_times is None:
        lam0 = spec.rates.at(0)
        next_arr = gap_buf.next_exp() / lam0 if lam0 > 0 else math.inf
    else:
        next_arr = float(arrival_times[0]) if horizon > 0 else math.inf

    def resample_arrival(now: float) -> float:
        lam = spec.rates.at(min(level, n))
        return now + gap_buf.next_exp() / lam if lam > 0 else math.inf

    k = 0
    while k < horizon:
        if next_arr == math.inf and not jobs:
            break  # no arrivals can ever occur again
        # completions strictly before (or tied with) the next arrival
        while jobs:
            c = prof[level - 1] if level <= n else prof[n - 1]
            d = min(jobs)
            t_comp = t + (d[0] - coord) / c
            if t_comp > next_arr:
                break
            occ[min(level, n)] += t_comp - t
            t = t_comp
            coord = d[0]
            jobs.remove(d)
            level -= 1
            served_a += 1
            if measuring:
                served_m += 1
                soj_served += t - d[2]
            if level == 0:
                idle_start = t
            if trace is not None:
                trace.append(f"{t!r} complete {level + 1} {level} {d[1]}")
            if gap_buf is not None:
                next_arr = resample_arrival(t)
        if next_arr == math.inf:
            break
        # advance to the arrival epoch
        if level > 0:
            c = prof[level - 1] if level <= n else prof[n - 1]
            coord += (next_arr - t) * c
        occ[min(level, n)] += next_arr - t
        t = next_arr
        if k == warmup and not measuring:
            measuring = True
            snap_t.append(t)
            snap_occ.append(occ.copy())
            snap_loss.append(losses_m)
        length = float(lengths[k])
        jid = k
        k += 1
        if measuring:
            seen[min(level, n)] += 1
        if level == 0 and measuring and idle_start >= (snap_t[0] if snap_t else 0.0):
            idle_periods.append(t - idle_start)
        # admission
        if level < n or not limited:
            if length == 0.0:
                served_a += 1
                if measuring:
                    served_m += 1
                if level == 0:
                    idle_start = t
                if trace is not None:
                    trace.append(f"{t!r} admit0 {level} {level} {jid}")
            else:
                jobs.append((coord + length, jid, t))
                level += 1
                if trace is not None:
                    trace.append(f"{t!r} admit {level - 1} {level} {jid}")
        else:
            if disc is Discipline.SRL_LOSS:
                d = min(jobs)
                if length >= d[0] - coord:
                    jobs.remove(d)
                    jobs.append((coord + length, jid, t))
                    displaced_a += 1
                    if measuring:
                        displaced_m += 1
                        losses_m += 1
                        soj_displaced += t - d[2]
                    if trace is not None:
                        trace.append(f"{t!r} displace {n} {n} {d[1]}")
                else:
                    blocked_a += 1
                    if measuring:
                        blocked_m += 1
                        losses_m += 1
                    if trace is not None:
                        trace.append(f"{t!r} block {n} {n} {jid}")
            elif disc is Discipline.FCFD_DISPLACE:
                d = min(jobs, key=lambda j: j[1])
                jobs.remove(d)
                displaced_a += 1
                if measuring:
                    displaced_m += 1
                    losses_m += 1
                    soj_displaced += t - d[2]
                if length == 0.0:
                    level -= 1
                    served_a += 1
                    if measuring:
                        served_m += 1
                    if level == 0:
                        idle_start = t
                    if trace is not None:
                        trace.append(f"{t!r} displace0 {n} {n - 1} {d[1]}")
                else:
                    jobs.append((coord + length, jid, t))
                    if trace is not None:
                        trace.append(f"{t!r} displace {n} {n} {d[1]}")
            else:  # BlockArriving
                blocked_a += 1
                if measuring:
                    blocked_m += 1
                    losses_m += 1
                if trace is not None:
                    trace.append(f"{t!r} block {n} {n} {jid}")
        if gap_buf is not None:
            next_arr = resample_arrival(t)
        elif k < horizon:
            next_arr = float(arrival_times[k])
        else:
            next_arr = math.inf
        if next_boundary is not None and k == next_boundary:
            snap_t.append(t)
            snap_occ.append(occ.copy())
            snap_loss.append(losses_m)
            boundary_idx += 1
            next_boundary = (
                boundaries[boundary_idx] if boundary_idx < len(boundaries) else None
            )

    arrivals_a = k
    arrivals_m = max(0, k - warmup)
    end_t = t

    if arrivals_m == 0 or not snap_t:
        # degenerate run (no arrivals, e.g. zero rate at level 0)
        occ_frac = np.zeros(n + 1)
        occ_frac[0] = 1.0
        return SimEstimates(
            n=n,
            occupancy=tuple(map(float, occ_frac)),
            occupancy_ci_half=(math.nan,) * (n + 1),
            seen=(math.nan,) * (n + 1),
            loss_prob=0.0,
            loss_ci_half=math.nan,
            sojourn_served=math.nan,
            sojourn_displaced=math.nan,
            sojourn_all=math.nan,
            idle_periods=np.array([]),
            counts=dict(arrivals=0, served=0, displaced=0, blocked=0),
            totals=dict(
                arrivals=arrivals_a,
                served=served_a,
                displaced=displaced_a,
                blocked=blocked_a,
                end_level=level,
            ),
            horizon_time=0.0,
            warmup_time=end_t,
        )

    warm_t = snap_t[0]
    span = end_t - warm_t
    warm_occ = snap_occ[0]
    if span > 0:
        occ_frac = (occ - warm_occ) / span
    else:
        occ_frac = np.zeros(n + 1)
        occ_frac[min(level, n)] = 1.0

    # batch means over N_BATCHES equal arrival batches
    occ_ci = np.full(n + 1, math.nan)
    loss_ci = math.nan
    if len(snap_t) == N_BATCHES + 1 and batch > 0:
        ts = np.array(snap_t)
        dt = np.diff(ts)
        if np.all(dt > 0):
            kq = float(sstats.t.ppf(0.975, N_BATCHES - 1))
            occs = np.diff(np.array(snap_occ), axis=0) / dt[:, None]
            occ_ci = kq * occs.std(axis=0, ddof=1) / math.sqrt(N_BATCHES)
            lf = np.diff(np.array(snap_loss)) / batch
            loss_ci = kq * float(lf.std(ddof=1)) / math.sqrt(N_BATCHES)

    loss_prob = (displaced_m + blocked_m) / arrivals_m
    return SimEstimates(
        n=n,
        occupancy=tuple(map(float, occ_frac)),
        occupancy_ci_half=tuple(map(float, occ_ci)),
        seen=tuple(float(s) / arrivals_m for s in seen),
        loss_prob=loss_prob,
        loss_ci_half=loss_ci,
        sojourn_served=soj_served / served_m if served_m else math.nan,
        sojourn_displaced=soj_displaced / displaced_m if displaced_m else math.nan,
        sojourn_all=(soj_served + soj_displaced) / arrivals_m,
        idle_periods=np.array(idle_periods),
        counts=dict(
            arrivals=arrivals_m,
            served=served_m,
            displaced=displaced_m,
            blocked=blocked_m,
        ),
        totals=dict(
            arrivals=arrivals_a,
            served=served_a,
            displaced=displaced_a,
            blocked=blocked_a,
            end_level=level,
        ),
        horizon_time=span,
        warmup_time=warm_t,
    )


# ---------------------------------------------------------------------------
# reference engine: explicit jobs, one operation per event


class SimState:
    """Explicit-state system for unit-level stepping.

    Holds the clock, the service coordinate, the in-service jobs, and at
    most one pending arrival. advance_to_next_event and apply_arrival do
    all the work; run_reference drives them with the same random-input
    protocol as the fast loop and must reproduce its trace exactly.
    """

    def __init__(self, spec: SystemSpec):
        self.spec = spec
        self.t = 0.0
        self.coord = 0.0
        self.jobs: list[Job] = []
        self.pending: tuple[float, float, int] | None = None  # (time, length, id)

    @property
    def level(self) -> int:
        return len(self.jobs)

    def per_job_rate(self) -> float:
        if not self.jobs:
            return 0.0
        return self.spec.profile.rate_at(self.level)

    def schedule_arrival(self, time: float, length: float, job_id: int) -> None:
        if time < self.t:
            raise ValueError("arrival scheduled in the past")
        self.pending = (time, length, job_id)

    def _materialize(self) -> None:
        for j in self.jobs:
            j.attained = self.coord - j.admit_coord
            if j.remaining < -1e-12:
                raise RuntimeError(
                    f"job {j.id} remaining {j.remaining} negative at t={self.t}"
                )

    def next_completion(self) -> tuple[float, Job] | None:
        if not self.jobs:
            return None
        j = min(self.jobs, key=lambda x: (x.admit_coord + x.total_length, x.id))
        finish = j.admit_coord + j.total_length
        return self.t + (finish - self.coord) / self.per_job_rate(), j

    def _advance_clock(self, new_t: float) -> None:
        if self.jobs:
            self.coord += (new_t - self.t) * self.per_job_rate()
        self.t = new_t
        self._materialize()


def advance_to_next_event(state: SimState) -> Event:
    """Move the system to its next event and apply it if it is a
    completion; an arrival event only advances the clock, leaving the
    admission decision to apply_arrival."""
    nxt = state.next_completion()
    t_arr = state.pending[0] if state.pending is not None else math.inf
    t_comp = nxt[0] if nxt is not None else math.inf
    if t_comp == math.inf and t_arr == math.inf:
        raise RuntimeError("no pending arrival and no jobs in service")
    if t_comp <= t_arr:  # ties resolve completion-first
        t_c, j = nxt
        finish = j.admit_coord + j.total_length
        if state.jobs:
            state.coord = finish
        state.t = t_c
        state._materialize()
        state.jobs.remove(j)
        if abs(j.attained - j.total_length) > 1e-9 * max(j.total_length, 1.0):
            raise RuntimeError(
                f"job {j.id} completed with attained {j.attained} "
                f"!= length {j.total_length}"
            )
        return Event("completion", t_c, j.id)
    state._advance_clock(t_arr)
    return Event("arrival", t_arr, state.pending[2])


def apply_arrival(state: SimState, job: Job, discipline: Discipline):
    """Admit, block, or displace for the arrival `job`; the clock must
    already stand at its arrival time. Zero-length admissions complete
    on the spot. Returns Admitted, ArrivingLost, or DisplacedLost."""
    if job.arrival_time != state.t:
        raise ValueError("state clock is not at the job's arrival time")
    state.pending = None
    n = state.spec.n
    at_cap = state.spec.variant is Variant.LIMITED and state.level >= n

    def admit() -> None:
        job.admit_coord = state.coord
        job.attained = 0.0
        if job.total_length == 0.0:
            return  # departs instantly, never joins the set
        state.jobs.append(job)

    if not at_cap:
        admit()
        return Admitted(job.id)
    if discipline is Discipline.BLOCK_ARRIVING:
        return ArrivingLost(job.id)
    if discipline is Discipline.SRL_LOSS:
        victim = min(state.jobs, key=lambda x: (x.admit_coord + x.total_length, x.id))
        if job.total_length >= victim.remaining:
            state.jobs.remove(victim)
            admit()
            return DisplacedLost(victim.id, job.id)
        return ArrivingLost(job.id)
    victim = min(state.jobs, key=lambda x: x.id)
    state.jobs.remove(victim)
    admit()
    return DisplacedLost(victim.id, job.id)


def run_reference(
    spec: SystemSpec,
    horizon: int,
    seed: int = DEFAULT_SEED,
    stream: int = 0,
) -> tuple[list[str], dict[str, int]]:
    """Drive SimState through `horizon` arrivals with the same random
    input as run() and return (trace, whole-run counters). Slower than
    run() but structurally independent of it; the traces must agree
    line for line."""
    arrival_times, gap_buf, lengths = _draw_inputs(spec, horizon, seed, stream)
    state = SimState(spec)
    n = spec.n
    limited = spec.variant is Variant.LIMITED
    trace: list[str] = []
    counts = dict(arrivals=0, served=0, displaced=0, blocked=0)

    def resample(now: float) -> float:
        lam = spec.rates.at(min(state.level, n))
        return now + gap_buf.next_exp() / lam if lam > 0 else math.inf

    k = 0
    if arrival_times is None:
        next_arr = resample(0.0)
    else:
        next_arr = float(arrival_times[0]) if horizon > 0 else math.inf
    while k < horizon:
        if next_arr == math.inf and not state.jobs:
            break
        if next_arr < math.inf:
            state.schedule_arrival(next_arr, float(lengths[k]), k)
        else:
            state.pending = None
        ev = advance_to_next_event(state)
        if ev.kind == "completion":
            lvl = state.level
            trace.append(f"{ev.time!r} complete {lvl + 1} {lvl} {ev.job_id}")
            counts["served"] += 1
            if gap_buf is not None:
                next_arr = resample(state.t)
            continue
        length = float(lengths[k])
        jid = k
        k += 1
        counts["arrivals"] += 1
        before = state.level
        job = Job(id=jid, arrival_time=ev.time, total_length=length)
        out = apply_arrival(state, job, spec.discipline)
        after = state.level
        if isinstance(out, Admitted):
            if length == 0.0:
                counts["served"] += 1
                trace.append(f"{ev.time!r} admit0 {before} {after} {jid}")
            else:
                trace.append(f"{ev.time!r} admit {before} {after} {jid}")
        elif isinstance(out, ArrivingLost):
            counts["blocked"] += 1
            trace.append(f"{ev.time!r} block {before} {after} {jid}")
        else:
            counts["displaced"] += 1
            if length == 0.0:
                counts["served"] += 1
                trace.append(f"{ev.time!r} displace0 {before} {after} {out.victim_id}")
            else:
                trace.append(f"{ev.time!r} displace {before} {after} {out.victim_id}")
        if gap_buf is not None:
            next_arr = resample(state.t)
        elif k < horizon:
            next_arr = float(arrival_times[k])
        else:
            next_arr = math.inf
    counts["end_level"] = state.level
    return trace, counts


# ---------------------------------------------------------------------------
# coupled run: capped system and uncapped companion on one input sequence


def run_coupled(
    spec: SystemSpec,
    horizon: int,
    seed: int = DEFAULT_SEED,
    stream: int = 0,
) -> CouplingReport:
    """Run the capped system and its uncapped companion on the identical
    arrival and length sequence for `horizon` events (arrivals plus
    completions), asserting after every event that the capped level
    equals min(uncapped level, n) and that the capped job set is exactly
    the n longest-remaining jobs of the uncapped one whenever the latter
    holds at least n. Raises CouplingViolation with the recent event
    window if either check fails.

    The capped spec must use SrlLoss on the Limited variant; the
    companion is derived from it (same rates and lengths, per-job rate
    c_n beyond level n).
    """
    if spec.discipline is not Discipline.SRL_LOSS:
        raise ValueError("coupled run requires the SrlLoss discipline")
    if spec.variant is not Variant.LIMITED:
        raise ValueError("coupled run starts from the Limited variant")
    if not isinstance(horizon, (int, np.integer)) or horizon < 0:
        raise ValueError(f"horizon must be a nonnegative event count, got {horizon!r}")

    n = spec.n
    prof = spec.profile.c
    # worst case every event is an arrival
    arrival_times, gap_buf, lengths = _draw_inputs(spec, max(horizon, 1), seed, stream)

    t = 0.0
    coord = 0.0
    jobs1: list[tuple[float, int]] = []  # capped, sorted ascending
    jobs2: list[tuple[float, int]] = []  # uncapped, sorted ascending
    occ1 = np.zeros(n + 1)
    occ2 = np.zeros(n + 1)
    events = arrivals = completions = checks = 0
    max_level2 = 0
    window: deque[str] = deque(maxlen=_TRACE_WINDOW)

    def check(label: str) -> None:
        nonlocal checks
        checks += 1
        x1, x2 = len(jobs1), len(jobs2)
        if x1 != min(x2, n):
            raise CouplingViolation(
                f"level identity broken after {label} at t={t!r}: "
                f"capped={x1}, min(uncapped, n)={min(x2, n)}",
                t,
                list(window),
            )
        if x1 and jobs1 != jobs2[-x1:]:
            raise CouplingViolation(
                f"job multiset broken after {label} at t={t!r}: capped set "
                f"is not the {x1} longest-remaining of the uncapped set",
                t,
                list(window),
            )

    if gap_buf is not None:
        lam0 = spec.rates.at(0)
        next_arr = gap_buf.next_exp() / lam0 if lam0 > 0 else math.inf
    else:
        next_arr = float(arrival_times[0]) if horizon > 0 else math.inf

    def resample(now: float) -> float:
        lam = spec.rates.at(min(len(jobs2), n))
        return now + gap_buf.next_exp() / lam if lam > 0 else math.inf

    k = 0
    while events < horizon:
        x2 = len(jobs2)
        if jobs2:
            c = prof[min(x2, n) - 1]
            t_comp = t + (jobs2[0][0] - coord) / c
        else:
            t_comp = math.inf
        if t_comp == math.inf and next_arr == math.inf:
            break
        if t_comp <= next_arr:
            # completion in the uncapped system; the capped one completes
            # the same job at the same instant iff it holds it
            occ1[len(jobs1)] += t_comp - t
            occ2[min(x2, n)] += t_comp - t
            t = t_comp
            coord = jobs2[0][0]
            done = jobs2.pop(0)
            if jobs1 and jobs1[0] == done:
                jobs1.pop(0)
            window.append(f"{t!r} complete job={done[1]} x1={len(jobs1)} x2={len(jobs2)}")
            completions += 1
            events += 1
            check("completion")
            if gap_buf is not None:
                next_arr = resample(t)
            continue
        if k >= len(lengths):
            break  # ran out of pre-drawn arrivals; horizon effectively met
        # advance both systems to the arrival
        if jobs2:
            coord += (next_arr - t) * prof[min(x2, n) - 1]
        occ1[len(jobs1)] += next_arr - t
        occ2[min(x2, n)] += next_arr - t
        t = next_arr
        length = float(lengths[k])
        jid = k
        k += 1
        arrivals += 1
        events += 1
        if length == 0.0:
            # departs instantly from the uncapped system; the capped one
            # either does the same (below n) or turns it away (at n)
            window.append(f"{t!r} arrive0 job={jid} x1={len(jobs1)} x2={len(jobs2)}")
        else:
            entry = (coord + length, jid)
            insort(jobs2, entry)
            max_level2 = max(max_level2, len(jobs2))
            if len(jobs1) < n:
                insort(jobs1, entry)
            elif entry >= jobs1[0]:  # length >= shortest remaining
                jobs1.pop(0)
                insort(jobs1, entry)
            window.append(f"{t!r} arrive job={jid} x1={len(jobs1)} x2={len(jobs2)}")
        check("arrival")
        if gap_buf is not None:
            next_arr = resample(t)
        elif k < len(lengths):
            next_arr = float(arrival_times[k])
        else:
            next_arr = math.inf

    duration = t
    if duration > 0:
        occ1 /= duration
        occ2 /= duration
    else:
        occ1[0] = occ2[0] = 1.0
    return CouplingReport(
        n=n,
        events=events,
        arrivals=arrivals,
        completions=completions,
        duration=duration,
        occupancy_capped=tuple(map(float, occ1)),
        occupancy_uncapped=tuple(map(float, occ2)),
        max_uncapped_level=max_level2,
        checks=checks,
    )


# ---------------------------------------------------------------------------
# idle-period comparison


def compare_idle_periods(
    sample_a,
    sample_b,
    lam: float | None = None,
    level: float = 0.01,
) -> IdleComparison:
    """Two-sample distribution test between idle-period samples, at the
    given significance level. When `lam` is passed (constant-rate
    Poisson input), each sample is additionally tested against the
    exponential(lam) reference. Requires at least 500 samples per side.
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if len(a) < MIN_IDLE_SAMPLES or len(b) < MIN_IDLE_SAMPLES:
        raise ValueError(
            f"need at least {MIN_IDLE_SAMPLES} idle periods per sample, "
            f"got {len(a)} and {len(b)}"
        )
    res = sstats.ks_2samp(a, b)
    ref = None
    if lam is not None:
        if not lam > 0:
            raise ValueError("reference rate must be positive")
        rows = []
        for s in (a, b):
            r = sstats.kstest(s, "expon", args=(0.0, 1.0 / lam))
            rows.append((float(r.statistic), float(r.pvalue), bool(r.pvalue > level)))
        ref = tuple(rows)
    return IdleComparison(
        statistic=float(res.statistic),
        p_value=float(res.pvalue),
        passed=bool(res.pvalue > level),
        reference=ref,
    )
