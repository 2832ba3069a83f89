"""Exception hierarchy shared by all korolab modules."""


class KorolabError(Exception):
    """Base class for every error raised by korolab."""


class WeightError(KorolabError, ValueError):
    pass


class NonPositiveWeight(WeightError):
    """Some a_j <= 0, or inf b_j <= 0."""


class MonotonicityViolation(NonPositiveWeight):
    """The a-sequence is not nondecreasing."""


class UndefinedModel(WeightError):
    """A closed-form parameter is outside its admissible range."""


class UndefinedAsymptotic(KorolabError):
    """A limit was requested from a model that cannot supply it (finite lists)."""


class DimensionMismatch(KorolabError, ValueError):
    pass


class SpectrumOverflow(KorolabError, OverflowError):
    """A count or enumeration exceeds the supported range or work budget."""


class NegativeRadicand(KorolabError, ArithmeticError):
    """Worst-case error radicand is clearly negative (tolerance misuse)."""


class SingularSystem(KorolabError, ArithmeticError):
    pass


class DegenerateSeries(KorolabError, ValueError):
    """Error series unsuitable for rate fitting."""
