"""Work factors, key sizes and the design table for full-spectrum keys."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass

from .monomial_code import count_candidates_log2, is_prime

BITS_PER_KB = 8 * 1000

TABLE_ROWS = ((80, 103, 84), (128, 137, 132), (256, 257, 261))


def isd_log2_cost(n: int, k: int, w: int) -> float:
    """log2 of the ISD cost 2^(-c w), c = log2(1 - k/n)."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    if not 0 <= w <= n:
        raise ValueError(f"weight {w} outside [0, {n}]")
    return -w * math.log2(1 - k / n)


def code_dimension(p: int, r0: int, n0: int) -> int:
    return (n0 - r0) * p + r0 - 1


def key_size_bits(p: int, r0: int, n0: int) -> int:
    if not n0 > r0:
        raise ValueError("need n0 > r0")
    return r0 * (n0 - r0) * p


@dataclass(frozen=True)
class DesignPoint:
    SL: int
    p: int
    n0: int
    r0: int
    t: int
    log2_NW: float
    Ks_bits: int
    log2_WF_KR: float
    log2_WF_DA: float

    @property
    def n(self) -> int:
        return self.n0 * self.p

    @property
    def k(self) -> int:
        return code_dimension(self.p, self.r0, self.n0)

    @property
    def Ks_kB(self) -> float:
        return self.Ks_bits / BITS_PER_KB

    @property
    def meets_SL(self) -> bool:
        return min(self.log2_WF_KR, self.log2_WF_DA) >= self.SL


def wf_key_recovery(p: int, r0: int, n0: int) -> float:
    n, k = n0 * p, code_dimension(p, r0, n0)
    return math.log2(r0 / p) + isd_log2_cost(n, n - k, n0)


def wf_decoding(p: int, r0: int, n0: int, t: int) -> float:
    n, k = n0 * p, code_dimension(p, r0, n0)
    return isd_log2_cost(n, k, t) - 0.5 * math.log2(p)


def design_point(SL: int, p: int, t: int, r0: int | None = None, n0: int | None = None) -> DesignPoint:
    """Full-spectrum shape (n0 = p, r0 = ceil(p/2)) unless r0/n0 are given."""
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if t < 1:
        raise ValueError("t must be >= 1")
    n0 = p if n0 is None else n0
    r0 = (p + 1) // 2 if r0 is None else r0
    return DesignPoint(SL, p, n0, r0, t, count_candidates_log2(p), key_size_bits(p, r0, n0),
                       wf_key_recovery(p, r0, n0), wf_decoding(p, r0, n0, t))


def design_table(rows=TABLE_ROWS) -> list[DesignPoint]:
    return [design_point(SL, p, t) for SL, p, t in rows]


_COLUMNS = ("SL", "p", "n0", "r0", "t", "log2_NW", "Ks_kB", "log2_WF_KR", "log2_WF_DA", "meets_SL")


def _cells(pt: DesignPoint) -> list[str]:
    return [str(pt.SL), str(pt.p), str(pt.n0), str(pt.r0), str(pt.t), f"{pt.log2_NW:.0f}",
            f"{pt.Ks_kB:.2f}", f"{pt.log2_WF_KR:.1f}", f"{pt.log2_WF_DA:.1f}",
            "yes" if pt.meets_SL else "no"]


def format_table(points: list[DesignPoint]) -> str:
    rows = [list(_COLUMNS)] + [_cells(pt) for pt in points]
    widths = [max(len(r[c]) for r in rows) for c in range(len(_COLUMNS))]
    return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)) for r in rows) + "\n"


def table_csv(points: list[DesignPoint]) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(_COLUMNS)
    for pt in points:
        d = asdict(pt)
        out.writerow([d["SL"], d["p"], d["n0"], d["r0"], d["t"], f"{pt.log2_NW:.4f}",
                      f"{pt.Ks_kB:.4f}", f"{pt.log2_WF_KR:.4f}", f"{pt.log2_WF_DA:.4f}",
                      int(pt.meets_SL)])
    return buf.getvalue()
