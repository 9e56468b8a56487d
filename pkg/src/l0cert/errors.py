"""Exception hierarchy shared across the package."""


class L0CertError(Exception):
    """Base class for every error this package raises on purpose."""


class ZeroColumn(L0CertError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"column {index} has (near-)zero norm and cannot be standardized")


class RankDeficient(L0CertError):
    def __init__(self, support):
        self.support = tuple(int(i) for i in support)
        super().__init__(f"columns {self.support} form a rank-deficient submatrix")


class NotStandardized(L0CertError):
    def __init__(self, msg="instance columns are not unit-norm; standardize first"):
        super().__init__(msg)


class VacuousConstant(L0CertError):
    """A constant the bound divides by is zero or negative, so the bound says nothing."""


class TiedCorrelations(L0CertError):
    def __init__(self, position: int, value: float):
        self.position = position
        self.value = value
        super().__init__(
            f"|correlations| at sorted positions {position} and {position + 1} tie "
            f"at {value!r}; the selected subset is ill-defined"
        )


class DegenerateTie(L0CertError):
    def __init__(self, indices, lam: float):
        self.indices = tuple(int(i) for i in indices)
        self.lam = float(lam)
        super().__init__(
            f"simultaneous path events for columns {self.indices} at lambda={self.lam!r}"
        )


class TooLarge(L0CertError):
    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"enumeration would visit {count} subsets, above the cap of {cap}; "
            f"pass force=True (CLI: --force) or raise L0CERT_MAX_SUBSETS to proceed"
        )


class SpecViolation(L0CertError):
    """Generator parameters break the family's defining inequalities."""


class OutOfRange(L0CertError):
    def __init__(self, lam: float, lo: float):
        super().__init__(f"lambda={lam!r} below the computed path range (floor {lo!r})")
