from __future__ import annotations

import math
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

_CENT = Decimal("0.01")


def money(x: float) -> str:
    """Dollars rounded half-even to cents."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite amount {x}")
    d = Decimal(repr(float(x))).quantize(_CENT, rounding=ROUND_HALF_EVEN)
    if d == 0:
        d = abs(d)  # no "-0.00"
    return str(d)


def number(x: Optional[float]) -> str:
    """Shortest round-tripping text for a non-money decimal; blank for None."""
    if x is None:
        return ""
    if isinstance(x, int) or float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def percent(x: float) -> str:
    return f"{x:.2f}"
