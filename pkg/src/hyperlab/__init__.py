"""Characteristic roots of hyperbolic polynomials, branch tracking and regularity estimates."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AmbiguousCrossing,
    BadK,
    DegenerateDirection,
    DimensionMismatch,
    GridTooCoarse,
    HomogeneityError,
    HyperlabError,
    NoConvergence,
    NotHermitian,
    NotPSD,
    NotRealRooted,
    NotSymmetric,
    RankDeficient,
    ZeroPolynomial,
)
from .generators import (  # noqa: E402
    compose_char,
    determinantal,
    gk_compose,
    gk_forms,
    herm_coords,
    herm_det,
    herm_from_coords,
    lax_pencil,
    lorentzian,
)
from .hyperpoly import (  # noqa: E402
    CharRoots,
    HomPoly,
    HyperbolicityReport,
    char_roots,
    check_hyperbolic,
    cone_membership,
    evaluate,
    localization,
    restrict_line,
    sigma_k,
)
from .realroot import MonicRealPoly, RootTuple, from_roots, realness_defect, solve_real_rooted  # noqa: E402
from .spectral import (  # noqa: E402
    HermMatrix,
    SingularTriple,
    eig_desc,
    eig_track,
    hermitian_extension,
    ky_fan,
    singular_desc,
    sv_track,
)
from .stability import RealPoly, check_real_stable, homogenize, restrict_ray, stable_roots  # noqa: E402
from .tracking import (  # noqa: E402
    BranchSystem,
    PairOptions,
    RegularityReport,
    SampledCurve,
    pair_branches,
    regularity_report,
    sorted_branches,
    uniform_sweep,
)
