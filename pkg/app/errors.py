from typing import Optional


class MasseyError(Exception):
    """모든 계산 오류의 기본 클래스"""

    exit_code = 2
    status = "exhausted"

    def __init__(self, message: str = "", obstruction: Optional[str] = None):
        super().__init__(message)
        self.obstruction = obstruction


# 잘못된 입력 (exit 3)
class InvalidInput(MasseyError):
    exit_code = 3
    status = "invalid"


class NotAUnit(InvalidInput):
    pass


class AlgebraMismatch(InvalidInput):
    pass


class GeneratorLimitExceeded(InvalidInput):
    pass


class ZeroDivisorOnRestriction(InvalidInput):
    pass


# 예산/정밀도 소진 (exit 2)
class BudgetExhausted(MasseyError):
    exit_code = 2
    status = "exhausted"


class FactorizationBoundExceeded(BudgetExhausted):
    pass


class PrecisionExhausted(BudgetExhausted):
    pass


class SearchBoundExceeded(BudgetExhausted):
    pass


class NoSolutionInSupport(BudgetExhausted):
    pass


class VerificationFailed(BudgetExhausted):
    pass


# 수학적 부정 결과 (exit 1)
class MathematicalNegative(MasseyError):
    exit_code = 1
    status = "negative"


class NoSolution(MathematicalNegative):
    pass


class NotSplitByFa(MathematicalNegative):
    pass


class PreconditionFailed(MathematicalNegative):
    pass


class NoCertificate(MasseyError):
    """증명서를 찾지 못함: 장애물이 알려져 있으면 1, 아니면 2"""

    def __init__(self, message: str = "", obstruction: Optional[str] = None):
        super().__init__(message, obstruction)
        if obstruction is not None:
            self.exit_code = 1
            self.status = "negative"
