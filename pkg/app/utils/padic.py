"""
유한 정밀도 p-진 근사

값 value 와 정밀도 precision 의 쌍으로 p-진수를 나타낸다: 참값 x 는
v_p(x - value) >= precision 을 만족한다. precision 이 None 이면 정확한 유리수.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple
import logging

from sympy.ntheory import sqrt_mod

from app.errors import InvalidInput
from app.utils.arith import Rational, to_fraction, valuation

logger = logging.getLogger(__name__)


def _min_precision(*values: Optional[int]) -> Optional[int]:
    finite = [v for v in values if v is not None]
    return min(finite) if finite else None


def _plus(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None or b is None:
        return None
    return a + b


@dataclass(frozen=True)
class PadicApprox:
    """Q_p 원소의 근사"""
    p: int
    value: Fraction
    precision: Optional[int] = None

    @classmethod
    def exact(cls, p: int, q: Rational) -> "PadicApprox":
        return cls(p, to_fraction(q), None)

    def _value_valuation(self) -> Optional[int]:
        return None if self.value == 0 else valuation(self.value, self.p)

    def __add__(self, other: "PadicApprox") -> "PadicApprox":
        return PadicApprox(self.p, self.value + other.value, _min_precision(self.precision, other.precision))

    def __neg__(self) -> "PadicApprox":
        return PadicApprox(self.p, -self.value, self.precision)

    def __sub__(self, other: "PadicApprox") -> "PadicApprox":
        return self + (-other)

    def __mul__(self, other: "PadicApprox") -> "PadicApprox":
        # None 은 무한대 (값 0 의 부치, 정확한 값의 정밀도)
        va, vb = self._value_valuation(), other._value_valuation()
        precision = _min_precision(
            _plus(self.precision, vb) if self.precision is not None else None,
            _plus(other.precision, va) if other.precision is not None else None,
            _plus(self.precision, other.precision),
        )
        return PadicApprox(self.p, self.value * other.value, precision)

    def scale(self, q: Rational) -> "PadicApprox":
        return self * PadicApprox.exact(self.p, q)

    def unit_part(self, digits: int) -> Optional[Tuple[int, int]]:
        """(부치, 단원부 mod p^digits); 정밀도가 모자라면 None"""
        if self.value == 0:
            return None
        v = valuation(self.value, self.p)
        if self.precision is not None and self.precision - v < digits:
            return None
        unit = self.value / Fraction(self.p) ** v
        modulus = self.p ** digits
        residue = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
        return v, residue


def canonical_root(t: Rational, p: int, digits: int) -> PadicApprox:
    """국소 제곱 t 의 표준 제곱근

    홀수 p: mod p 잉여가 (p-1)/2 이하인 근, p = 2: 1 mod 4 인 근.
    """
    t = to_fraction(t)
    v = valuation(t, p)
    if v % 2:
        raise InvalidInput(f"{t} 은(는) Q_{p} 의 제곱이 아닙니다")
    unit = t / Fraction(p) ** v
    if p == 2:
        modulus = 2 ** (digits + 1)
        w = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
        if w % 8 != 1:
            raise InvalidInput(f"{t} 은(는) Q_2 의 제곱이 아닙니다")
        root = int(sqrt_mod(w, modulus)) % 2 ** digits
        if root % 4 != 1:
            root = (-root) % 2 ** digits
    else:
        modulus = p ** digits
        w = unit.numerator * pow(unit.denominator, -1, modulus) % modulus
        found = sqrt_mod(w, modulus)
        if found is None:
            raise InvalidInput(f"{t} 은(는) Q_{p} 의 제곱이 아닙니다")
        root = int(found)
        if root % p > (p - 1) // 2:
            root = modulus - root
    shift = Fraction(p) ** (v // 2)
    return PadicApprox(p, Fraction(root) * shift, digits + v // 2)


def same_up_to_sign(x: PadicApprox, y: PadicApprox) -> int:
    """x = ±y 가 알려졌을 때 부호 반환; 정밀도가 모자라면 0"""
    info = y.unit_part(1)
    if info is None:
        return 0
    v = info[0]
    diff = x - y
    margin = v + (3 if x.p == 2 else 1)
    if diff.precision is not None and diff.precision < margin:
        return 0
    if diff.value == 0 or valuation(diff.value, x.p) >= margin:
        return 1
    return -1
