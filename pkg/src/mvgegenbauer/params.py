"""The (2l, nu) parameter pair that indexes every weight and family."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class WeightParams:
    """Matrix size d = two_ell + 1 and Gegenbauer parameter nu > 0.

    ``two_ell = 0`` is the scalar case; it is rejected unless ``scalar_ok`` is
    set, since most matrix identities degenerate there.
    """

    two_ell: int
    nu: float
    scalar_ok: bool = False

    def __post_init__(self):
        if int(self.two_ell) != self.two_ell or self.two_ell < 0:
            raise ValueError(f"two_ell must be a nonnegative integer, got {self.two_ell!r}")
        object.__setattr__(self, "two_ell", int(self.two_ell))
        object.__setattr__(self, "nu", float(self.nu))
        if not self.nu > 0:
            raise ValueError(
                f"nu must be > 0 (got {self.nu}): the weight matrix is strictly positive "
                "definite on (-1, 1) only for nu > 0"
            )
        if self.two_ell == 0 and not self.scalar_ok:
            raise ValueError("two_ell = 0 is the scalar case; pass scalar_ok=True to allow it")

    @property
    def ell(self) -> float:
        return self.two_ell / 2

    @property
    def d(self) -> int:
        return self.two_ell + 1

    def shifted(self, k: int = 1) -> "WeightParams":
        """Same size, nu + k."""
        return WeightParams(self.two_ell, self.nu + k, self.scalar_ok)

    def label(self) -> str:
        return f"l={format_ell(self.two_ell)},nu={self.nu:g}"


def parse_ell(text) -> int:
    """Parse l given as 'p/2', 'p' or a decimal half-integer; returns 2l."""
    s = str(text).strip()
    try:
        if "/" in s:
            value = Fraction(s)
        else:
            value = Fraction(float(s)).limit_denominator(1000)
            if abs(float(value) - float(s)) > 1e-9:
                raise ValueError
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse l from {text!r}") from None
    twice = 2 * value
    if abs(float(twice) - round(float(twice))) > 1e-9 or twice < 0:
        raise ValueError(f"l must be a nonnegative half-integer, got {text!r}")
    return int(round(float(twice)))


def format_ell(two_ell: int) -> str:
    return str(two_ell // 2) if two_ell % 2 == 0 else f"{two_ell}/2"
