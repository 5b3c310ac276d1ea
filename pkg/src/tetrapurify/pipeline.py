"""Evaluation of multi-stage purification schedules.

A schedule is a chain of stages. A *distill* stage combines two outputs of
the previous stage with a rep code. A *boost* stage takes one output of the
previous stage as its initial state and folds further outputs into it,
cycling through a basis pattern ``reps`` times. Any detection discards the
stage's in-progress state; the stage then restarts from fresh inputs.

Boost stages can be evaluated three ways:

``exact``
    fold one booster at a time (refused above ``MAX_EXACT_REPS``);
``closed_form``
    the fold is linear in the boosted state, so the pattern's composite 4x4
    map is raised to the ``reps`` power by repeated squaring;
``bound``
    decayed upper bounds for bias boosting (``[Y]``) and bias busting
    (``[X, Z]``), usable at astronomically large ``reps``.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_CEILING, localcontext
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence, Union

from .distill import oplus, star
from .noise import Basis, PauliOdds, from_depolarizing, infidelity, normalize
from .numerics import ExtReal, format_number, get_backend, to_ext

__all__ = [
    "Mode",
    "Distill",
    "Boost",
    "Stage",
    "Schedule",
    "StageResult",
    "StageReport",
    "PipelineReport",
    "BoundResult",
    "eval_stage",
    "eval_schedule",
    "expected_cost",
    "boost_closed_form",
    "boost_exact",
    "bias_boost_bound",
    "bias_bust_bound",
    "MAX_EXACT_REPS",
    "fig3_schedule",
    "data_path",
    "floor_cbrt_inverse",
    "stage_from_json",
]

MAX_EXACT_REPS = 10**4
MAX_INFIDELITY = Fraction(1, 2)


class Mode(str, enum.Enum):
    EXACT = "exact"
    CLOSED_FORM = "closed_form"
    BOUND = "bound"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Distill:
    basis: Basis

    def __post_init__(self):
        object.__setattr__(self, "basis", Basis.parse(self.basis))

    @property
    def consumption(self) -> int:
        return 2

    @property
    def label(self) -> str:
        return str(self.basis)

    def to_json(self) -> dict:
        return {"type": "distill", "basis": str(self.basis)}


@dataclass(frozen=True)
class Boost:
    pattern: tuple
    reps: int
    mode: Mode = Mode.EXACT

    def __post_init__(self):
        pattern = tuple(Basis.parse(b) for b in self.pattern)
        if not pattern:
            raise ValueError("boost pattern must not be empty")
        if int(self.reps) < 1:
            raise ValueError("boost reps must be >= 1")
        object.__setattr__(self, "pattern", pattern)
        object.__setattr__(self, "reps", int(self.reps))
        object.__setattr__(self, "mode", Mode(self.mode))

    @property
    def steps(self) -> int:
        return self.reps * len(self.pattern)

    @property
    def consumption(self) -> int:
        return 1 + self.steps

    @property
    def label(self) -> str:
        pat = "".join(str(b) for b in self.pattern)
        reps = str(self.reps) if self.reps < 10**6 else format_number(self.reps, 2)
        return f"boost {pat} x{reps}"

    def to_json(self) -> dict:
        return {
            "type": "boost",
            "pattern": [str(b) for b in self.pattern],
            "reps": str(self.reps),
            "mode": str(self.mode),
        }


Stage = Union[Distill, Boost]


def stage_from_json(obj: dict) -> Stage:
    kind = obj.get("type")
    if kind == "distill":
        return Distill(obj["basis"])
    if kind == "boost":
        return Boost(tuple(obj["pattern"]), int(obj["reps"]), Mode(obj.get("mode", "exact")))
    raise ValueError(f"unknown stage type {kind!r}")


@dataclass
class Schedule:
    input: PauliOdds
    stages: list
    backend: str = "rational"

    def __post_init__(self):
        if not self.stages:
            raise ValueError("schedule needs at least one stage")
        self.backend = get_backend(self.backend).name

    @classmethod
    def from_json(cls, obj: dict, backend: str | None = None) -> "Schedule":
        name = backend or obj.get("backend", "rational")
        conv = get_backend(name)
        spec = obj["input"]
        if "infidelity" in spec:
            start = from_depolarizing(str(spec["infidelity"]), name)
        else:
            start = PauliOdds(*(conv(str(v)) for v in spec["odds"]))
        stages = [stage_from_json(s) for s in obj["stages"]]
        return cls(start, stages, name)

    @classmethod
    def load(cls, path, backend: str | None = None) -> "Schedule":
        with open(path) as fh:
            return cls.from_json(json.load(fh), backend)

    def to_json(self) -> dict:
        return {
            "input": {"odds": self.input.to_json()},
            "backend": self.backend,
            "stages": [s.to_json() for s in self.stages],
        }


# -- stage evaluation -----------------------------------------------------------


@dataclass
class StageResult:
    """Outcome of one stage given its input state."""

    out: PauliOdds
    discard_prob: Any
    discard_sum: Any = None  # sum of per-step discard chances (union bound); None if unknown
    per_step_discards: list | None = None
    cost_factor: Any = None  # expected previous-stage outputs consumed per output
    bound_mode: bool = False


def _check_input(state: PauliOdds):
    if not state.w > 0:
        raise ValueError("stage input has no identity component")
    if not infidelity(state) < MAX_INFIDELITY:
        raise ValueError("stage input infidelity must be below 0.5")


def eval_stage(in_state: PauliOdds, stage: Stage) -> StageResult:
    in_state = normalize(in_state)
    _check_input(in_state)
    if isinstance(stage, Distill):
        d = star(in_state, in_state, stage.basis)
        out = normalize(oplus(in_state, in_state, stage.basis))
        return StageResult(out, d, d, [d], expected_cost(1, stage, [d]))
    if isinstance(in_state.w, Fraction) and stage.reps > MAX_EXACT_REPS:
        raise ValueError(
            f"{stage.reps} reps cannot be evaluated with exact rationals; use the extended backend"
        )
    if stage.mode is Mode.EXACT:
        return boost_exact(in_state, stage.pattern, stage.reps)
    if stage.mode is Mode.CLOSED_FORM:
        return boost_closed_form(in_state, in_state, stage.pattern, stage.reps)
    return _boost_bound(in_state, stage)


def boost_exact(booster: PauliOdds, pattern: Sequence, reps: int, state: PauliOdds | None = None) -> StageResult:
    """Fold ``booster`` into ``state`` one step at a time."""
    pattern = [Basis.parse(b) for b in pattern]
    if reps > MAX_EXACT_REPS:
        raise ValueError(
            f"exact boosting limited to {MAX_EXACT_REPS} reps; use closed_form or bound mode"
        )
    booster = normalize(booster)
    cur = booster if state is None else normalize(state)
    discards = []
    survive = 1
    discard = 0
    dsum = 0
    for _ in range(reps):
        for b in pattern:
            d = star(cur, booster, b)
            discards.append(d)
            # Accumulate P(fail at this step) directly; avoids 1 - prod cancellation.
            discard = discard + survive * d
            survive = survive * (1 - d)
            dsum = dsum + d
            cur = normalize(oplus(cur, booster, b))
    stage = Boost(tuple(pattern), reps)
    return StageResult(cur, discard, dsum, discards, expected_cost(1, stage, discards))


def expected_cost(prev_cost, stage: Stage, per_boost_discards: Sequence):
    """Expected raw pairs per stage output under restart-on-detection.

    Each attempt consumes one initial input plus one input per step reached;
    an attempt succeeds with probability ``prod(1 - d_i)``.
    """
    reached = 1  # probability of reaching the current step
    consumed = 1
    for d in per_boost_discards:
        if d >= 1:
            return math.inf
        consumed = consumed + reached
        reached = reached * (1 - d)
    if isinstance(stage, Distill) and len(per_boost_discards) != 1:
        raise ValueError("a distill stage has exactly one discard probability")
    return prev_cost * consumed / reached


# -- closed form -------------------------------------------------------------


def _fold_matrix(b: PauliOdds, basis: Basis):
    """4x4 matrix ``M`` with ``oplus(s, b, basis) == M @ s``."""
    w, x, y, z = b
    o = 0 * w
    if basis is Basis.X:
        return [[w, x, o, o], [x, w, o, o], [o, o, y, z], [o, o, z, y]]
    if basis is Basis.Y:
        return [[w, o, y, o], [o, z, o, x], [y, o, w, o], [o, x, o, z]]
    return [[w, o, o, z], [o, y, x, o], [o, x, y, o], [z, o, o, w]]


def _detect_row(b: PauliOdds, basis: Basis):
    """Row vector ``r`` with ``r @ s`` equal to the detected weight of ``s ⊕ b``."""
    w, x, y, z = b
    if basis is Basis.X:
        p, q = y + z, w + x
        return [p, p, q, q]
    if basis is Basis.Y:
        p, q = x + z, w + y
        return [p, q, p, q]
    p, q = x + y, w + z
    return [p, q, q, p]


def _matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(1, 4)), a[i][0] * b[0][j]) for j in range(4)] for i in range(4)]


def _matvec(a, v):
    return [sum((a[i][k] * v[k] for k in range(1, 4)), a[i][0] * v[0]) for i in range(4)]


def _matadd(a, b):
    return [[a[i][j] + b[i][j] for j in range(4)] for i in range(4)]


def _identity(one):
    zero = 0 * one
    return [[one if i == j else zero for j in range(4)] for i in range(4)]


def _power_and_series(m, n: int, one):
    """Return ``(m**n, sum(m**k for k < n))`` in O(log n) products."""
    if n == 0:
        zero = 0 * one
        return _identity(one), [[zero] * 4 for _ in range(4)]
    if n % 2:
        p, s = _power_and_series(m, n - 1, one)
        return _matmul(m, p), _matadd(_identity(one), _matmul(m, s))
    p, s = _power_and_series(m, n // 2, one)
    return _matmul(p, p), _matadd(s, _matmul(p, s))


def boost_closed_form(state: PauliOdds, booster: PauliOdds, pattern: Sequence, reps: int) -> StageResult:
    """Boost ``state`` with ``reps`` cycles of ``pattern`` using matrix powers.

    Works for any pattern. Mass lost to detections is accumulated from
    nonnegative terms so the discard chance stays accurate when it is tiny.
    """
    pattern = [Basis.parse(b) for b in pattern]
    if reps < 1:
        raise ValueError("reps must be >= 1")
    booster = normalize(booster)
    tb = booster.total()
    pb = PauliOdds(*(c / tb for c in booster))  # booster as probabilities
    s0 = [c / state.total() for c in state]
    one = pb.w / pb.w

    maps = [_fold_matrix(pb, b) for b in pattern]
    prefixes = [_identity(one)]
    for m in maps[:-1]:
        prefixes.append(_matmul(m, prefixes[-1]))
    cycle = _matmul(maps[-1], prefixes[-1])

    power, series = _power_and_series(cycle, reps, one)
    final = _matvec(power, s0)
    visited = _matvec(series, s0)  # sum of states at the start of each cycle
    surv_sum = 0 * one
    discard = 0 * one
    for r, b in enumerate(pattern):
        v = _matvec(prefixes[r], visited)
        surv_sum = surv_sum + sum(v[1:], v[0])
        row = _detect_row(pb, b)
        discard = discard + sum((row[i] * v[i] for i in range(1, 4)), row[0] * v[0])
    survive = sum(final[1:], final[0])
    out = normalize(PauliOdds(*final))
    cost = (1 + surv_sum) / survive
    return StageResult(out, discard, None, None, cost)


# -- bounds ------------------------------------------------------------------


@dataclass(frozen=True)
class BoundResult:
    out_bound: PauliOdds
    discard_bound: Any
    reps: int
    discard_bound_simplified: Any = None


def _log10(x) -> Decimal:
    return to_ext(x).log10_decimal()


def _exact_fraction(x) -> Fraction | None:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, ExtReal) and abs(x.exponent) < 5000:
        return Fraction(Decimal(x.mantissa)) * Fraction(10) ** x.exponent
    return None


def _icbrt(n: int) -> int:
    """Floor of the real cube root of a nonnegative int."""
    if n < 0:
        raise ValueError("negative")
    if n < 2:
        return n
    k = 1 << ((n.bit_length() + 2) // 3)
    while True:
        nk = (2 * k + n // (k * k)) // 3
        if nk >= k:
            break
        k = nk
    while k**3 > n:
        k -= 1
    while (k + 1) ** 3 <= n:
        k += 1
    return k


def floor_cbrt_inverse(a) -> int:
    """``floor((1/a) ** (1/3))``."""
    q = _exact_fraction(a)
    if q is not None:
        return _icbrt(math.floor(1 / q))
    with localcontext() as ctx:
        ctx.prec = 60
        return int((Decimal(10) ** (-_log10(a) / 3)).to_integral_value(rounding="ROUND_FLOOR"))


def bias_boost_bound(a, reps: int | None = None) -> BoundResult:
    """Decayed bound for Y-boosting ``(1, a, a, a)`` with itself.

    With the default ``reps = floor(cbrt(1/a)) - 1`` the output decays to
    ``(1, (2a)**k / 2, a*k, (2a)**k / 2)`` with ``k = reps + 1`` and the discard
    chance is at most ``4 a**(2/3)``. An explicit ``reps`` gives the same shape
    with discard at most ``4 a reps``.
    """
    if not (0 < a <= Fraction(1, 1000)):
        raise ValueError("bias boost bound requires 0 < a <= 1e-3")
    default = reps is None
    if default:
        reps = floor_cbrt_inverse(a) - 1
    if reps < 1:
        raise ValueError("reps must be >= 1")
    one = a / a
    k = reps + 1
    if not a * k + a < MAX_INFIDELITY:
        raise ValueError("too many boosts: Y error would exceed the decay-monotone regime")
    xz = (2 * a) ** k / 2
    out = PauliOdds(one, xz, a * k, xz)
    two_thirds = Fraction(2, 3)
    simplified = 4 * _pow_frac(a, two_thirds)
    bound = simplified if default else 4 * a * reps
    return BoundResult(out, bound, reps, simplified)


def _pow_frac(x, p: Fraction):
    if isinstance(x, ExtReal):
        return x ** p
    if isinstance(x, Fraction):
        xf = float(x)
        if xf > 0:
            return Fraction(xf ** float(p))
        return get_backend("rational")(to_ext(x) ** p)
    return float(x) ** float(p)


def bias_bust_bound(alpha, beta, reps: int | None = None) -> BoundResult:
    """Decayed bound for alternating X/Z boosts with booster ``(1, α, β, α)``.

    With the default ``reps = ceil(log_β(α) / 2)`` pairs every error term ends
    at most ``4α``. An explicit ``reps`` uses the decayed recurrence
    ``x -> xβ + 2α``, ``y -> yβ² + 2α`` summed in closed form. The discard
    bound is ``10 β reps``; ``10 sqrt(β)`` is reported alongside.
    """
    if not (0 < beta <= Fraction(1, 100)):
        raise ValueError("bias bust bound requires 0 < beta <= 1e-2")
    if alpha == 0:
        raise ValueError("alpha is zero (float underflow?); use the extended backend")
    if not (0 < alpha and alpha * 20 <= beta):
        raise ValueError("bias bust bound requires 0 < alpha <= beta / 20")
    one = beta / beta
    needed = _bust_reps(alpha, beta)
    default = reps is None
    if default:
        reps = needed
    if reps < 1:
        raise ValueError("reps must be >= 1")
    if default:
        e = 4 * alpha
        out = PauliOdds(one, e, e, e)
    else:
        x = alpha * beta**reps + 2 * alpha / (1 - beta)
        y = beta ** (2 * reps + 1) + 2 * alpha / (1 - beta * beta)
        out = PauliOdds(one, x, y, x)
    simplified = 10 * _pow_frac(beta, Fraction(1, 2))
    return BoundResult(out, 10 * beta * reps, reps, simplified)


def _bust_reps(alpha, beta) -> int:
    with localcontext() as ctx:
        ctx.prec = 60
        ratio = _log10(alpha) / (2 * _log10(beta))
        return max(1, int(ratio.to_integral_value(rounding=ROUND_CEILING)))


def _boost_bound(in_state: PauliOdds, stage: Boost) -> StageResult:
    pattern = tuple(stage.pattern)
    if pattern == (Basis.Y,):
        res = bias_boost_bound(in_state.max_error(), stage.reps)
    elif pattern == (Basis.X, Basis.Z):
        alpha = max(in_state.x, in_state.z)
        res = bias_bust_bound(alpha, in_state.y, stage.reps)
    else:
        raise ValueError(f"bound mode supports patterns [Y] and [X, Z], not {list(map(str, pattern))}")
    d = res.discard_bound
    if d >= 1:
        cost = math.inf
    else:
        cost = (1 + stage.steps) / (1 - d)
    return StageResult(res.out_bound, d, d, None, cost, bound_mode=True)


# -- whole schedules -----------------------------------------------------------


@dataclass
class StageReport:
    index: int
    label: str
    mode: str
    out: PauliOdds
    discard_prob: Any
    discard_sum: Any
    expected_raw_pairs: Any
    storage_index: int
    bound_mode: bool
    consumption: int

    @property
    def infidelity(self):
        return infidelity(self.out)

    def to_json(self) -> dict:
        return {
            "index": self.index,
            "label": self.label,
            "mode": self.mode,
            "out": self.out.to_json(),
            "infidelity": _json_num(self.infidelity),
            "discard_prob": _json_num(self.discard_prob),
            "discard_sum": None if self.discard_sum is None else _json_num(self.discard_sum),
            "expected_raw_pairs": _json_num(self.expected_raw_pairs),
            "storage_index": self.storage_index,
            "bound_mode": self.bound_mode,
            "consumption": str(self.consumption),
        }


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def _json_num(x) -> str:
    if _is_inf(x):
        return "inf"
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


@dataclass
class PipelineReport:
    input: PauliOdds
    stage_reports: list
    backend: str
    final_infidelity: Any = None
    total_stages: int = 0
    storage_qubits_per_party: int = 0
    total_expected_raw_pairs: Any = None
    cumulative_discard_sum: Any = None
    storage_breakdown: dict = field(default_factory=dict)

    @property
    def final(self) -> PauliOdds:
        return self.stage_reports[-1].out

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "input": self.input.to_json(),
            "stages": [r.to_json() for r in self.stage_reports],
            "final_infidelity": _json_num(self.final_infidelity),
            "total_stages": self.total_stages,
            "storage_qubits_per_party": self.storage_qubits_per_party,
            "storage_breakdown": self.storage_breakdown,
            "total_expected_raw_pairs": _json_num(self.total_expected_raw_pairs),
            "cumulative_discard_sum": _json_num(self.cumulative_discard_sum),
        }

    def to_table(self, sig_figs: int = 2) -> str:
        header = ["#", "stage", "mode", "w", "x", "y", "z", "discard", "raw pairs/out"]
        rows = [["in", "", "", *(format_number(c, sig_figs) for c in normalize(self.input))]
                + ["", ""]]
        for r in self.stage_reports:
            disc = format_number(r.discard_prob, sig_figs)
            if r.bound_mode:
                disc = "<=" + disc
            rows.append([
                str(r.index), r.label, r.mode,
                *(format_number(c, sig_figs) for c in r.out),
                disc, format_number(r.expected_raw_pairs, sig_figs)
                if not _is_inf(r.expected_raw_pairs) else "inf",
            ])
        widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
        lines.append("  ".join("-" * w for w in widths))
        lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in rows]
        lines.append("")
        lines.append(f"final infidelity: {format_number(self.final_infidelity, 3)}")
        lines.append(
            f"storage per party: {self.storage_qubits_per_party} qubits "
            f"({self.total_stages} stage slots + 1 in flight)"
        )
        lines.append(f"expected raw pairs per output: {format_number(self.total_expected_raw_pairs, 3)}")
        lines.append(f"cumulative discard sum: {format_number(self.cumulative_discard_sum, 3)}")
        return "\n".join(lines)


def eval_schedule(s: Schedule) -> PipelineReport:
    conv = get_backend(s.backend)
    state = normalize(PauliOdds(*(conv(c) for c in s.input)))
    _check_input(state)
    reports = []
    cost = conv(1)
    dsum = conv(0)
    for i, stage in enumerate(s.stages, start=1):
        res = eval_stage(state, stage)
        cost = math.inf if _is_inf(res.cost_factor) or _is_inf(cost) else cost * res.cost_factor
        dsum = dsum + res.discard_prob
        mode = "distill" if isinstance(stage, Distill) else str(stage.mode)
        reports.append(StageReport(
            index=i,
            label=stage.label,
            mode=mode,
            out=res.out,
            discard_prob=res.discard_prob,
            discard_sum=res.discard_sum,
            expected_raw_pairs=cost,
            storage_index=i,
            bound_mode=res.bound_mode,
            consumption=stage.consumption,
        ))
        state = res.out
    n = len(s.stages)
    return PipelineReport(
        input=s.input,
        stage_reports=reports,
        backend=s.backend,
        final_infidelity=infidelity(state),
        total_stages=n,
        storage_qubits_per_party=n + 1,
        total_expected_raw_pairs=cost,
        cumulative_discard_sum=dsum,
        storage_breakdown={"stage_slots": n, "in_flight": 1},
    )


def data_path(name: str) -> Path:
    return Path(__file__).with_name("data") / name


def fig3_schedule(backend: str = "extended") -> Schedule:
    """The committed ten-stage schedule from infidelity 1/3."""
    return Schedule.load(data_path("fig3_schedule.json"), backend)
