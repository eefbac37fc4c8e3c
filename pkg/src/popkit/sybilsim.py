"""Monte Carlo economics of Sybil attacks on threshold-verification schemes.

The modeled scheme assigns every identity to a small verification group each
cycle and requires attendance in at least ceil(theta * W) of any trailing W
cycles. The attacker keeps S Sybil identities verified by hiring minions,
real humans who stand in for one identity for one synchronized slot, except
when a group comes up all-Sybil ("lucky") and verifies itself for free.

Attendance scheduling is the cheapest compliant schedule: each Sybil attends
on a fixed rotation with period W and duty ceil(theta * W), with rotation
phases spread round-robin across Sybils so the per-cycle duty roster is flat.
A lucky draw saves the hire only when it lands on a duty cycle; luck is not
banked. Histories start on the rotation (steady state), so per-cycle costs
match the long-run rate from cycle zero.

Randomness: numpy PCG64 generators, one independent child SeedSequence per
replication, so results are reproducible bit-for-bit for a master seed and
replications may run in any order or in parallel.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_MASTER_SEED = 1729

_SLIP_NOTE = (
    "all-attacker group rate follows prod_{i=1..g-1} (S-i)/(H+S-i), roughly f^(g-1); "
    "at f=0.10, g=4 that is about 1.0e-3, i.e. 0.1% (a hasty 10%^3 = .01% drops a "
    "factor of ten; the percent must not be cubed with its sign)."
)


class ScenarioInvalid(ValueError):
    pass


@dataclass(frozen=True)
class SybilScenario:
    n_honest: int
    n_sybil: int
    group_size: int = 2
    threshold: float = 0.5
    window: int = 10
    reward: float = 1.0
    minion_cost: float = 1.0
    creation_cost: float = 5.0
    reinvest: bool = False
    cycles: int = 200
    replications: int = 20
    share_cap: float = 0.9
    budget: float | None = None

    def validate(self) -> None:
        if self.n_honest < 0 or self.n_sybil < 0:
            raise ScenarioInvalid("population counts must be >= 0")
        if self.group_size < 2:
            raise ScenarioInvalid("group_size must be >= 2")
        if self.n_honest + self.n_sybil < self.group_size:
            raise ScenarioInvalid("population smaller than one group")
        if not 0 < self.threshold <= 1:
            raise ScenarioInvalid("threshold must lie in (0, 1]")
        if self.window < 1:
            raise ScenarioInvalid("window must be >= 1")
        if self.cycles < 1 or self.replications < 1:
            raise ScenarioInvalid("cycles and replications must be >= 1")
        if self.reward < 0 or self.minion_cost < 0:
            raise ScenarioInvalid("reward and minion_cost must be >= 0")
        if self.reinvest and self.creation_cost <= 0:
            raise ScenarioInvalid("reinvestment needs creation_cost > 0")
        if not 0 < self.share_cap < 1:
            raise ScenarioInvalid("share_cap must lie in (0, 1)")
        if self.budget is not None and self.budget < 0:
            raise ScenarioInvalid("budget must be >= 0 when set")

    @property
    def required_attendance(self) -> int:
        return math.ceil(self.threshold * self.window)

    def to_obj(self) -> dict:
        obj = {
            "cycles": self.cycles,
            "creation_cost": str(self.creation_cost),
            "group_size": self.group_size,
            "minion_cost": str(self.minion_cost),
            "n_honest": self.n_honest,
            "n_sybil": self.n_sybil,
            "reinvest": self.reinvest,
            "replications": self.replications,
            "reward": str(self.reward),
            "share_cap": str(self.share_cap),
            "threshold": str(self.threshold),
            "window": self.window,
        }
        if self.budget is not None:
            obj["budget"] = str(self.budget)
        return obj

    @classmethod
    def from_obj(cls, obj: dict) -> "SybilScenario":
        known = {
            "n_honest": int,
            "n_sybil": int,
            "group_size": int,
            "threshold": float,
            "window": int,
            "reward": float,
            "minion_cost": float,
            "creation_cost": float,
            "reinvest": bool,
            "cycles": int,
            "replications": int,
            "share_cap": float,
            "budget": float,
        }
        unknown = set(obj) - set(known)
        if unknown:
            raise ScenarioInvalid(f"unknown scenario fields: {sorted(unknown)}")
        kwargs = {}
        for key, value in obj.items():
            caster = known[key]
            if caster is bool and not isinstance(value, bool):
                raise ScenarioInvalid(f"{key} must be a boolean")
            kwargs[key] = caster(value)
        try:
            scenario = cls(**kwargs)
        except TypeError as exc:
            raise ScenarioInvalid(str(exc)) from None
        scenario.validate()
        return scenario


def _group_sizes(n: int, g: int) -> list[int]:
    """Group sizes partitioning n: groups of g, remainder merged as g+1."""
    full = n // g
    r = n % g
    if r == 0:
        return [g] * full
    if r <= full:
        return [g] * (full - r) + [g + 1] * r
    # degenerate tiny-n case: fold leftovers round-robin onto the last groups
    sizes = [g] * full
    for i in range(r):
        sizes[full - 1 - (i % full)] += 1
    return sizes


def assign_groups(n_identities: int, g: int, rng: np.random.Generator) -> list[list[int]]:
    """Uniform random partition of identities 0..n-1 into verification groups."""
    if n_identities < g:
        raise ValueError("need at least one full group")
    perm = rng.permutation(n_identities)
    groups: list[list[int]] = []
    pos = 0
    for size in _group_sizes(n_identities, g):
        groups.append([int(x) for x in perm[pos : pos + size]])
        pos += size
    return groups


def lucky_fraction_exact(H: int, S: int, g: int) -> float:
    """P(a given Sybil's whole group is Sybil): prod_{i=1..g-1} (S-i)/(H+S-i)."""
    if S <= 0:
        return 0.0
    if S < g:
        return 0.0
    p = 1.0
    for i in range(1, g):
        p *= (S - i) / (H + S - i)
    return p


class AttendanceState:
    """Trailing-window attendance histories (the last W-1 cycles per identity)."""

    def __init__(self, window: int):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self.history: dict = {}

    @classmethod
    def fresh(cls, ids, window: int) -> "AttendanceState":
        state = cls(window)
        for ident in ids:
            state.history[ident] = deque(maxlen=window - 1)
        return state

    @classmethod
    def stationary(cls, ids, window: int, threshold: float) -> "AttendanceState":
        """Histories already on the duty rotation, phases spread round-robin."""
        state = cls(window)
        m = math.ceil(threshold * window)
        for position, ident in enumerate(ids):
            phase = position % window
            bits = (((c + phase) % window) < m for c in range(-(window - 1), 0))
            state.history[ident] = deque(bits, maxlen=window - 1)
        return state

    def window_count(self, ident) -> int:
        return sum(self.history.setdefault(ident, deque(maxlen=self.window - 1)))

    def record(self, ident, attended: bool) -> None:
        self.history.setdefault(ident, deque(maxlen=self.window - 1)).append(bool(attended))


@dataclass(frozen=True)
class MinionPlan:
    hired: frozenset
    lucky: frozenset
    attended: frozenset
    verified: frozenset


def attacker_cover(
    groups: list[list[int]],
    sybil_set: set,
    attendance_state: AttendanceState,
    theta: float,
    W: int,
) -> MinionPlan:
    """Greedy cover for one cycle.

    All-Sybil groups verify themselves for free. A Sybil in a mixed group
    gets a minion only on its duty cycles, i.e. when skipping would drop its
    trailing-window attendance below ceil(theta * W). Each minion covers one
    identity for one cycle. Luck off a duty cycle is not banked.
    """
    m = math.ceil(theta * W)
    lucky = set()
    for grp in groups:
        if grp and all(member in sybil_set for member in grp):
            lucky.update(member for member in grp)
    hired, attended, verified = set(), set(), set()
    members = [member for grp in groups for member in grp if member in sybil_set]
    for ident in members:
        count = attendance_state.window_count(ident)
        needed = count < m
        if needed:
            attended.add(ident)
            if ident not in lucky:
                hired.add(ident)
        if count + (1 if needed else 0) >= m:
            verified.add(ident)
        attendance_state.record(ident, needed)
    return MinionPlan(
        hired=frozenset(hired),
        lucky=frozenset(lucky),
        attended=frozenset(attended),
        verified=frozenset(verified),
    )


@dataclass(frozen=True)
class EconomyState:
    sybil_count: int
    verified_sybils: int = 0
    minions_hired: int = 0
    income: float = 0.0
    cost: float = 0.0
    profit: float = 0.0
    pending_new: int = 0


def economy_step(
    state: EconomyState, R: float, C: float, creation_cost: float, reinvest: bool
) -> EconomyState:
    """Settle one cycle's books; reinvested profit buys Sybils for next cycle."""
    income = state.verified_sybils * R
    cost = state.minions_hired * C
    profit = income - cost
    pending = int(max(profit, 0.0) // creation_cost) if reinvest and creation_cost > 0 else 0
    return replace(state, income=income, cost=cost, profit=profit, pending_new=pending)


@dataclass(frozen=True)
class CycleMetrics:
    cycle: int
    sybil_count: int
    sybil_share: float
    lucky_fraction: float
    minions_hired: int
    income: float
    cost: float
    profit: float
    advantage: float


_CSV_FIELDS = (
    "cycle",
    "sybil_count",
    "sybil_share",
    "lucky_fraction",
    "minions",
    "income",
    "cost",
    "advantage",
)


@dataclass(frozen=True)
class SimResult:
    scenario: SybilScenario
    master_seed: int
    rows: tuple[dict, ...]
    final_share: float
    notes: tuple[str, ...] = ()

    def to_csv(self) -> str:
        header = list(_CSV_FIELDS) + [f"{name}_stderr" for name in _CSV_FIELDS[1:]]
        lines = [",".join(header)]
        for row in self.rows:
            lines.append(",".join(_csv_cell(row[name]) for name in header))
        return "\n".join(lines) + "\n"

    def mean_over_cycles(self, name: str) -> float:
        return float(np.mean([row[name] for row in self.rows]))

    def summary(self) -> dict:
        return {
            "cycles": len(self.rows),
            "final_share": str(self.final_share),
            "master_seed": self.master_seed,
            "mean_advantage": str(self.mean_over_cycles("advantage")),
            "mean_lucky_fraction": str(self.mean_over_cycles("lucky_fraction")),
            "mean_minions": str(self.mean_over_cycles("minions")),
            "notes": list(self.notes),
            "replications": self.scenario.replications,
        }


def _csv_cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _advantage(income: float, cost: float) -> float:
    if cost > 0:
        return income / cost
    return math.inf if income > 0 else 1.0


def _lucky_mask(perm: np.ndarray, is_sybil: np.ndarray, g: int) -> np.ndarray:
    """Boolean per identity: my whole verification group is Sybil."""
    n = len(perm)
    lucky = np.zeros(n, dtype=bool)
    full = n // g
    r = n % g
    if r <= full:
        cut = (full - r) * g
        main = perm[:cut].reshape(-1, g)
        if main.size:
            rows = is_sybil[main].all(axis=1)
            lucky[main[rows].ravel()] = True
        if r:
            rest = perm[cut:].reshape(r, g + 1)
            rows = is_sybil[rest].all(axis=1)
            lucky[rest[rows].ravel()] = True
        return lucky
    pos = 0
    for size in _group_sizes(n, g):
        grp = perm[pos : pos + size]
        pos += size
        if is_sybil[grp].all():
            lucky[grp] = True
    return lucky


def _stationary_rows(phases: np.ndarray, window: int, m: int) -> np.ndarray:
    """Ring-buffer rows already on the rotation (slot s holds cycle s - W)."""
    slots = np.arange(window)
    return ((slots[None, :] + phases[:, None]) % window) < m


def _simulate_rep(scenario: SybilScenario, rng: np.random.Generator) -> dict[str, np.ndarray]:
    H = scenario.n_honest
    S = scenario.n_sybil
    W = scenario.window
    g = scenario.group_size
    m = scenario.required_attendance
    R, C = scenario.reward, scenario.minion_cost

    phases = np.arange(S) % W
    phase_counter = S
    att = _stationary_rows(phases, W, m)
    total = att.sum(axis=1)
    budget_left = math.inf if scenario.budget is None else scenario.budget

    out = {name: np.zeros(scenario.cycles) for name in
           ("sybil_count", "sybil_share", "lucky_fraction", "minions",
            "income", "cost", "profit", "advantage")}

    pending = 0
    for t in range(scenario.cycles):
        if pending:
            new_phases = (phase_counter + np.arange(pending)) % W
            phase_counter += pending
            att = np.vstack([att, _stationary_rows(new_phases, W, m)])
            total = att.sum(axis=1)
            phases = np.concatenate([phases, new_phases])
            S += pending
            pending = 0

        N = H + S
        perm = rng.permutation(N)
        is_sybil = np.arange(N) >= H
        lucky = _lucky_mask(perm, is_sybil, g)[H:]

        idx = t % W
        leaving = att[:, idx]
        window_count = total - leaving
        needed = window_count < m

        hire = needed & ~lucky
        n_hire = int(hire.sum())
        if C > 0 and n_hire * C > budget_left:
            affordable = int(budget_left // C)
            # drop the hires the budget cannot fund, in identity order
            over = np.cumsum(hire) > affordable
            hire &= ~over
            n_hire = int(hire.sum())
        attended = needed & (lucky | hire)
        verified = (window_count + attended) >= m

        total += attended.astype(int) - leaving
        att[:, idx] = attended

        econ = economy_step(
            EconomyState(
                sybil_count=S,
                verified_sybils=int(verified.sum()),
                minions_hired=n_hire,
            ),
            R,
            C,
            scenario.creation_cost,
            scenario.reinvest,
        )
        budget_left -= econ.cost

        out["sybil_count"][t] = S
        out["sybil_share"][t] = S / N
        out["lucky_fraction"][t] = lucky.sum() / S if S else 0.0
        out["minions"][t] = econ.minions_hired
        out["income"][t] = econ.income
        out["cost"][t] = econ.cost
        out["profit"][t] = econ.profit
        out["advantage"][t] = _advantage(econ.income, econ.cost)

        if scenario.reinvest and econ.pending_new > 0:
            cap = scenario.share_cap
            headroom = int((cap * N - S) // (1 - cap))
            pending = max(0, min(econ.pending_new, headroom))

    return out


def run_scenario(scenario: SybilScenario, master_seed: int = DEFAULT_MASTER_SEED) -> SimResult:
    """Run all replications on independent substreams and aggregate."""
    scenario.validate()
    children = np.random.SeedSequence(master_seed).spawn(scenario.replications)
    reps = [
        _simulate_rep(scenario, np.random.Generator(np.random.PCG64(child)))
        for child in children
    ]

    rows = []
    names = ("sybil_count", "sybil_share", "lucky_fraction", "minions", "income", "cost", "advantage")
    stacked = {name: np.stack([rep[name] for rep in reps]) for name in names}
    n_reps = scenario.replications
    for t in range(scenario.cycles):
        row: dict = {"cycle": t}
        for name in names:
            column = stacked[name][:, t]
            row[name] = float(column.mean())
            if n_reps > 1 and np.isfinite(column).all():
                row[f"{name}_stderr"] = float(column.std(ddof=1) / math.sqrt(n_reps))
            else:
                row[f"{name}_stderr"] = 0.0
        rows.append(row)

    final_share = float(stacked["sybil_share"][:, -1].mean())
    notes = [
        "exact all-attacker group probability at start: "
        f"{lucky_fraction_exact(scenario.n_honest, scenario.n_sybil, scenario.group_size):.6g}"
    ]
    if scenario.group_size >= 3:
        notes.append(_SLIP_NOTE)
    return SimResult(
        scenario=scenario,
        master_seed=master_seed,
        rows=tuple(rows),
        final_share=final_share,
        notes=tuple(notes),
    )


def plateau_curve(
    H: int,
    theta: float,
    g: int,
    S_values,
    seed: int = DEFAULT_MASTER_SEED,
    cycles: int = 160,
    replications: int = 3,
    window: int = 10,
) -> list[tuple[int, float]]:
    """Steady-state minions per cycle for each Sybil population size."""
    curve = []
    warmup = window
    for S in S_values:
        scenario = SybilScenario(
            n_honest=H,
            n_sybil=int(S),
            group_size=g,
            threshold=theta,
            window=window,
            cycles=cycles,
            replications=replications,
            reinvest=False,
        )
        result = run_scenario(scenario, master_seed=seed)
        steady = [row["minions"] for row in result.rows[warmup:]]
        curve.append((int(S), float(np.mean(steady))))
    return curve


def timeshift_demo(
    m_identities: int, asynchronous: bool, slots_per_cycle: int = 1, n_humans: int = 1
) -> int:
    """Identities kept verified per cycle by n_humans.

    Asynchronous verification lets one human attend every identity's
    self-chosen slot in turn, so all m identities verify. Synchronized slots
    pin one human to one identity per slot; a body cannot be in two places.
    """
    if m_identities < 0 or slots_per_cycle < 0 or n_humans < 0:
        raise ValueError("counts must be >= 0")
    if asynchronous:
        return m_identities if n_humans > 0 else 0
    return min(m_identities, slots_per_cycle * n_humans)
