"""Side-by-side comparison of the committed ten-stage schedule with published values."""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal

from .numerics import ExtReal, to_ext
from .pipeline import PipelineReport, eval_schedule, fig3_schedule

__all__ = [
    "PUBLISHED_ROWS",
    "PUBLISHED_TAIL",
    "TAIL_BAND",
    "RowComparison",
    "round_sig",
    "display_discard_percent",
    "compare_rows",
    "render_comparison",
]

# Published vectors (x, y, z with w = 1) and whole-percent discard labels.
PUBLISHED_ROWS = [
    ("X", ("3.2e-1", "5.4e-2", "5.4e-2"), 35),
    ("Y", ("3.5e-2", "1.1e-1", "1.1e-1"), 39),
    ("X", ("7.0e-2", "2.3e-2", "2.3e-2"), 29),
    ("Y", ("3.2e-3", "4.6e-2", "5.4e-3"), 16),
    ("Z", ("3.0e-4", "2.2e-3", "1.1e-2"), 9),
    ("X", ("6.0e-4", "1.2e-4", "4.7e-5"), 3),
    ("bias (24 Y boosts)", ("10.0e-81", "3.0e-3", "9.6e-81"), 2),
    ("bust (15 XZ boosts)", ("3.0e-83", "9.9e-79", "9.6e-81"), 10),
]

# Published tail: decimal exponents of x, y, z; discards shown as "<1%".
PUBLISHED_TAIL = [
    ("bias (1e27 Y boosts)", (-(10**28), -55, -(10**28))),
    ("bust (1e27 XZ boosts)", (-(10**28), -(10**28), -(10**28))),
]

# Exponent magnitudes accepted as matching the displayed 10^(-10^28).
TAIL_BAND = (10**27, 10**29)


def round_sig(value, sig: int = 2) -> tuple[int, int]:
    """``(digits, exponent)`` with ``value ~ digits * 10**exponent`` and ``sig`` digits.

    Works for floats, Fractions and ExtReals, including values far below the
    float range.
    """
    v = to_ext(value)
    if v.is_zero():
        return 0, 0
    m, e = v.mantissa, v.exponent
    digits = int(Decimal(repr(m)).scaleb(sig - 1).quantize(Decimal(1), rounding="ROUND_HALF_EVEN"))
    if digits >= 10**sig:
        digits //= 10
        e += 1
    return digits, e - (sig - 1)


def display_discard_percent(discard_sum) -> int:
    """Whole-percent label that rounds the summed per-step discard chance up."""
    pct = float(to_ext(discard_sum) * ExtReal(100))
    # Guard against float noise nudging an exact integer upward.
    return max(0, math.ceil(pct - 1e-9))


@dataclass
class RowComparison:
    index: int
    label: str
    ours: tuple
    published: tuple
    cell_match: tuple
    discard_ours: int
    discard_published: int
    discard_exact_pct: float

    @property
    def match(self) -> bool:
        return all(self.cell_match) and self.discard_ours == self.discard_published


@dataclass
class TailComparison:
    index: int
    label: str
    exponents: tuple
    values: tuple
    published: tuple
    in_band: tuple
    discard_bound: float


def compare_rows(report: PipelineReport | None = None) -> tuple[list, list]:
    if report is None:
        report = eval_schedule(fig3_schedule("extended"))
    rows = []
    for (label, vec, disc), r in zip(PUBLISHED_ROWS, report.stage_reports):
        ours = tuple(r.out)[1:]
        cells = tuple(round_sig(a) == round_sig(to_ext(b)) for a, b in zip(ours, vec))
        rows.append(RowComparison(
            index=r.index,
            label=label,
            ours=ours,
            published=vec,
            cell_match=cells,
            discard_ours=display_discard_percent(r.discard_sum),
            discard_published=disc,
            discard_exact_pct=float(to_ext(r.discard_prob)) * 100,
        ))
    tail = []
    for (label, exps), r in zip(PUBLISHED_TAIL, report.stage_reports[len(PUBLISHED_ROWS):]):
        got = tuple(to_ext(c).exponent for c in tuple(r.out)[1:])
        band = tuple(TAIL_BAND[0] <= -e <= TAIL_BAND[1] for e in got)
        tail.append(TailComparison(r.index, label, got, tuple(r.out)[1:], exps, band, float(to_ext(r.discard_prob))))
    return rows, tail


def _fmt(v) -> str:
    d, e = round_sig(v)
    if d == 0:
        return "0"
    s = str(d)
    return f"{s[0]}.{s[1:]}e{e + len(s) - 1}"


def _exp_str(e: int) -> str:
    if abs(e) >= 10**6:
        mag = Decimal(-e) if e < 0 else Decimal(e)
        head = f"{mag:.1e}".replace("e+", "e")
        return f"1e{'-' if e < 0 else ''}{head}"
    return f"1e{e}"


def render_comparison(rows, tail, stage: int | None = None) -> str:
    lines = [f"{'#':<3}{'stage':<22}{'ours (x, y, z)':<34}{'published':<32}{'discard':<16}match"]
    for r in rows:
        if stage is not None and r.index != stage:
            continue
        ours = ", ".join(_fmt(v) for v in r.ours)
        pub = ", ".join(r.published)
        disc = f"{r.discard_ours}% / {r.discard_published}%"
        lines.append(f"{r.index:<3}{r.label:<22}{ours:<34}{pub:<32}{disc:<16}{'yes' if r.match else 'NO'}")
    for t in tail:
        if stage is not None and t.index != stage:
            continue
        ours = ", ".join(_exp_str(e) if abs(e) >= 10**6 else _fmt(v) for e, v in zip(t.exponents, t.values))
        pub = ", ".join(_exp_str(e) for e in t.published)
        ok = "yes" if all(t.in_band) else "partial" if any(t.in_band) else "NO"
        lines.append(f"{t.index:<3}{t.label:<22}{ours:<34}{pub:<32}{'<=' + _fmt(t.discard_bound):<16}{ok}")
    lines.append("")
    lines.append("vectors match after rounding both sides to 2 significant figures;")
    lines.append("discards are the summed per-step chances rounded up to a whole percent;")
    lines.append("tail rows check exponent magnitudes against [1e27, 1e29].")
    return "\n".join(lines)
