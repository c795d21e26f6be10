from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Dict, Iterable, List, Optional, Tuple, Union
import logging

from sympy import factorint, integer_nthroot, isprime, perfect_power

try:
    from sympy.functions.combinatorial.numbers import jacobi_symbol
except ImportError:
    from sympy.ntheory import jacobi_symbol

from app.config import get_config
from app.errors import FactorizationBoundExceeded, InvalidInput

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]

# 분해 상한을 넘는 수에서 먼저 떼어내는 작은 소인수의 범위
SMALL_PRIME_LIMIT = 10**5


@dataclass(frozen=True)
class FactoredInt:
    """부호와 소인수 거듭제곱으로 분해된 정수"""
    sign: int
    factors: Tuple[Tuple[int, int], ...] = field(default_factory=tuple)

    def value(self) -> int:
        result = self.sign
        for prime, exponent in self.factors:
            result *= prime ** exponent
        return result

    def primes(self) -> List[int]:
        return [prime for prime, _ in self.factors]


def factor(n: int, bound: Optional[int] = None) -> FactoredInt:
    """0이 아닌 정수 소인수분해

    상한을 넘는 수는 작은 소인수와 소수/거듭제곱 여인수로 쪼개 보고,
    남은 합성 여인수가 여전히 상한을 넘을 때만 포기한다.
    """
    if n == 0:
        raise InvalidInput("0은 분해할 수 없습니다")
    limit = bound if bound is not None else get_config().factor_bound
    if abs(n) <= limit:
        return _factor_cached(n)
    pieces, rest = split_small_primes(abs(n))
    if rest > 1:
        for prime, exponent in _factor_large(rest, limit).items():
            pieces[prime] = pieces.get(prime, 0) + exponent
    sign = 1 if n > 0 else -1
    return FactoredInt(sign, tuple(sorted(pieces.items())))


@lru_cache(maxsize=8192)
def _factor_cached(n: int) -> FactoredInt:
    sign = 1 if n > 0 else -1
    pieces = factorint(abs(n)) if abs(n) > 1 else {}
    return FactoredInt(sign, tuple(sorted((int(p), int(e)) for p, e in pieces.items())))


def split_small_primes(m: int) -> Tuple[Dict[int, int], int]:
    """m > 0 을 작은 소인수 부분과 여인수로 (여인수는 1 이거나 SMALL_PRIME_LIMIT 보다 큰 소인수만 가짐)"""
    pieces: Dict[int, int] = {}
    rest = 1
    for p, e in factorint(m, limit=SMALL_PRIME_LIMIT).items():
        p, e = int(p), int(e)
        if p <= SMALL_PRIME_LIMIT or isprime(p):
            pieces[p] = pieces.get(p, 0) + e
        else:
            rest *= p ** e
    return pieces, rest


def _factor_large(m: int, limit: int) -> Dict[int, int]:
    if m <= limit:
        return dict(_factor_cached(m).factors)
    if isprime(m):
        return {m: 1}
    power = perfect_power(m)
    if power:
        base, exponent = int(power[0]), int(power[1])
        return {p: e * exponent for p, e in _factor_large(base, limit).items()}
    raise FactorizationBoundExceeded(f"|{m}| 이(가) 분해 상한 {limit} 을(를) 넘습니다")


def to_fraction(q: Rational) -> Fraction:
    return q if isinstance(q, Fraction) else Fraction(q)


@dataclass(frozen=True, order=True)
class SquareClass:
    """유리수 제곱류: 부호 있는 무제곱 정수 대표"""
    representative: int

    def __post_init__(self):
        if self.representative == 0:
            raise InvalidInput("제곱류 대표는 0이 될 수 없습니다")

    def __mul__(self, other: "SquareClass") -> "SquareClass":
        return squarefree_class(self.representative * other.representative)

    def is_trivial(self) -> bool:
        return self.representative == 1

    def __int__(self) -> int:
        return self.representative

    def __str__(self) -> str:
        return str(self.representative)


def squarefree_class(q: Rational) -> SquareClass:
    """유리수의 무제곱 대표"""
    q = to_fraction(q)
    if q == 0:
        raise InvalidInput("0에는 제곱류가 없습니다")
    representative = -1 if q < 0 else 1
    for part in (q.numerator, q.denominator):
        for prime, exponent in factor(abs(part)).factors:
            if exponent % 2:
                representative *= prime
    return SquareClass(representative)


def same_square_class(q: Rational, r: Rational) -> bool:
    product = to_fraction(q) * to_fraction(r)
    if product == 0:
        raise InvalidInput("0에는 제곱류가 없습니다")
    return is_rational_square(product)


def square_reduced(q: Rational) -> Fraction:
    """q 와 같은 제곱류의 작은 정수 대표

    상한을 넘는 여인수는 분해하지 않고 제곱/거듭제곱 부분만 뗀다.
    """
    q = to_fraction(q)
    if q == 0:
        raise InvalidInput("0에는 제곱류가 없습니다")
    m = q.numerator * q.denominator
    pieces, rest = split_small_primes(abs(m))
    value = -1 if m < 0 else 1
    for prime, exponent in pieces.items():
        if exponent % 2:
            value *= prime
    return Fraction(value * _squarefree_cofactor(rest))


def _squarefree_cofactor(m: int) -> int:
    if m == 1:
        return 1
    if m <= get_config().factor_bound:
        return int(squarefree_class(m))
    _, exact = integer_nthroot(m, 2)
    if exact:
        return 1
    power = perfect_power(m)
    if power:
        # b^e (e 홀수) 는 b 와 같은 류
        return _squarefree_cofactor(int(power[0]))
    return m


def rational_content(values: Iterable[Rational]) -> Fraction:
    """0이 아닌 값들의 양의 유리 최대공약수"""
    numerator, denominator = 0, 1
    for value in values:
        value = to_fraction(value)
        if value:
            numerator = gcd(numerator, value.numerator)
            denominator = lcm(denominator, value.denominator)
    if numerator == 0:
        raise InvalidInput("모든 값이 0입니다")
    return Fraction(numerator, denominator)


def rational_sqrt(q: Rational) -> Optional[Fraction]:
    """정확한 유리 제곱근 (없으면 None)"""
    q = to_fraction(q)
    if q < 0:
        return None
    if q == 0:
        return Fraction(0)
    num, num_exact = integer_nthroot(q.numerator, 2)
    den, den_exact = integer_nthroot(q.denominator, 2)
    if num_exact and den_exact:
        return Fraction(int(num), int(den))
    return None


def is_rational_square(q: Rational) -> bool:
    return rational_sqrt(q) is not None


def valuation(q: Rational, p: int) -> int:
    """p-진 부치"""
    q = to_fraction(q)
    if q == 0:
        raise InvalidInput("0의 부치는 정의되지 않습니다")
    v = 0
    num, den = q.numerator, q.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def prime_support(q: Rational) -> List[int]:
    """분자와 분모의 소인수"""
    q = to_fraction(q)
    primes = set(factor(abs(q.numerator)).primes()) if q.numerator else set()
    primes.update(factor(q.denominator).primes())
    return sorted(primes)


def jacobi(a: int, n: int) -> int:
    """홀수 n > 0 에 대한 야코비 기호"""
    return int(jacobi_symbol(a % n, n))


def kronecker_symbol(a: int, n: int) -> int:
    """크로네커 기호 (a/n)"""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5) and twos % 2:
            result = -result
    if n == 1:
        return result
    return result * jacobi(a, n)


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """"p/q" 형식 파싱"""
    if isinstance(text, (int, Fraction)):
        return to_fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidInput(f"유리수 형식 오류: {text!r} ({str(e)})")


def format_rational(q: Rational) -> str:
    q = to_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def exponent_vector(q: Rational, primes: List[int]) -> Optional[List[int]]:
    """{-1} ∪ primes 위의 지수 벡터 (mod 2); 지지 밖 소수가 있으면 None"""
    q = to_fraction(q)
    vector = [1 if q < 0 else 0]
    remaining: Dict[int, int] = {}
    for part in (q.numerator, q.denominator):
        for prime, exponent in factor(abs(part)).factors:
            remaining[prime] = remaining.get(prime, 0) + exponent
    for prime in primes:
        vector.append(remaining.pop(prime, 0) % 2)
    if any(e % 2 for e in remaining.values()):
        return None
    return vector
