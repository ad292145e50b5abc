"""Symbolic circuit depth: nonnegative integer combinations of named constants."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = ["DepthExpr", "BASIS", "D_STD", "D_ADD", "D_MUL", "D_EXP", "D_SQRT", "D_F",
           "UNIT", "ZERO"]

BASIS = ("d_std", "d_add", "d_mul", "d_exp", "d_sqrt", "d_f", "unit")
_PRETTY = ("d_std", "d_⊕", "d_⊗", "d_exp", "d_sqrt", "d_f", "")
_ALIASES = {
    "d_std": 0, "d_add": 1, "d_⊕": 1, "d_oplus": 1, "d_mul": 2, "d_⊗": 2,
    "d_otimes": 2, "d_exp": 3, "d_sqrt": 4, "d_f": 5, "unit": 6, "": 6,
}
_TERM = re.compile(r"^(\d*)\s*\*?\s*(d_[a-z⊕⊗]+|unit)?$")


@dataclass(frozen=True, order=False)
class DepthExpr:
    coeffs: tuple[int, ...] = (0,) * len(BASIS)

    def __post_init__(self) -> None:
        c = tuple(int(x) for x in self.coeffs)
        if len(c) != len(BASIS):
            raise ValueError(f"expected {len(BASIS)} coefficients")
        if any(x < 0 for x in c):
            raise ValueError("depth coefficients are nonnegative")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def of(cls, **terms: int) -> "DepthExpr":
        c = [0] * len(BASIS)
        for name, k in terms.items():
            c[_ALIASES[name]] += k
        return cls(tuple(c))

    @classmethod
    def parse(cls, text: str) -> "DepthExpr":
        """Parse ``"4d_std + 3d_add + d_exp"`` (unicode ⊕/⊗ also accepted)."""
        c = [0] * len(BASIS)
        text = text.strip()
        if text in ("", "0"):
            return cls()
        for raw in text.split("+"):
            term = raw.strip().replace(" ", "")
            match = _TERM.match(term)
            if match is None or (not match.group(1) and not match.group(2)):
                raise ValueError(f"bad depth term {raw!r}")
            k = int(match.group(1)) if match.group(1) else 1
            name = match.group(2) or "unit"
            if name not in _ALIASES:
                raise ValueError(f"unknown depth constant {name!r}")
            c[_ALIASES[name]] += k
        return cls(tuple(c))

    def __add__(self, other: "DepthExpr") -> "DepthExpr":
        return DepthExpr(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, k: int) -> "DepthExpr":
        return DepthExpr(tuple(a * k for a in self.coeffs))

    __rmul__ = __mul__

    def __le__(self, other: "DepthExpr") -> bool:
        return all(a <= b for a, b in zip(self.coeffs, other.coeffs))

    def join(self, other: "DepthExpr") -> "DepthExpr":
        return DepthExpr(tuple(max(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    def weigh(self, weights: Sequence[float]) -> float:
        return sum(a * w for a, w in zip(self.coeffs, weights))

    def __getitem__(self, name: str) -> int:
        return self.coeffs[_ALIASES[name]]

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def _render(self, names: Iterable[str]) -> str:
        parts = []
        for k, name in zip(self.coeffs, names):
            if k == 0:
                continue
            if not name:
                parts.append(str(k))
            else:
                parts.append(name if k == 1 else f"{k}{name}")
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self._render(_PRETTY)

    def ascii(self) -> str:
        return self._render(BASIS[:-1] + ("",))


ZERO = DepthExpr()
D_STD = DepthExpr.of(d_std=1)
D_ADD = DepthExpr.of(d_add=1)
D_MUL = DepthExpr.of(d_mul=1)
D_EXP = DepthExpr.of(d_exp=1)
D_SQRT = DepthExpr.of(d_sqrt=1)
D_F = DepthExpr.of(d_f=1)
UNIT = DepthExpr.of(unit=1)
