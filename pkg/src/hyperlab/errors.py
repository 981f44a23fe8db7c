"""Exception hierarchy shared by all hyperlab modules."""


class HyperlabError(Exception):
    """Base class for every error raised by hyperlab."""


class NotRealRooted(HyperlabError, ValueError):
    """A polynomial expected to be real-rooted has a non-real root."""

    def __init__(self, message, defect=None, index=None):
        super().__init__(message)
        self.defect = defect
        self.index = index


class NoConvergence(HyperlabError, ArithmeticError):
    pass


class DimensionMismatch(HyperlabError, ValueError):
    pass


class DegenerateDirection(HyperlabError, ValueError):
    """f(v) vanishes (to tolerance), so v cannot serve as a hyperbolicity direction."""


class ZeroPolynomial(HyperlabError, ValueError):
    pass


class HomogeneityError(HyperlabError, ValueError):
    pass


class BadK(HyperlabError, ValueError):
    pass


class NotPSD(HyperlabError, ValueError):
    pass


class NotHermitian(HyperlabError, ValueError):
    pass


class NotSymmetric(HyperlabError, ValueError):
    pass


class AmbiguousCrossing(HyperlabError):
    pass


class GridTooCoarse(HyperlabError, ValueError):
    pass


class RankDeficient(HyperlabError):
    """The full-rank hypothesis of singular value tracking fails at a grid index."""

    def __init__(self, index, sigma_min=None, t=None):
        msg = f"rank deficient at grid index {index}"
        if t is not None:
            msg += f" (t={t:.6g}, sigma_min={sigma_min:.3g})"
        super().__init__(msg)
        self.index = index
        self.sigma_min = sigma_min
        self.t = t
