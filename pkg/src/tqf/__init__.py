"""Local analysis, representation sieves and universality search for diagonal ternary forms."""

__version__ = "0.1.0"

from .core import (
    Form,
    MemoryBudgetError,
    NumberTables,
    Progression,
    build_tables,
    discriminant,
    is_squarefree,
    isqrt,
    make_form,
    normalize_squarefree,
)
from .gaps import (
    GapReport,
    HistogramRow,
    alpha_survey,
    expected_universal_count,
    gap_report,
    scan_family,
)
from .local import (
    INF,
    CompanionResult,
    almost_universal_witness,
    anisotropic_places,
    binary_residue_coverage,
    companion_form,
    hilbert_symbol,
    is_anisotropic,
    legendre_symbol,
    spinor_safe,
)
from .search import CandidateReport, admissible_triples, search_pair, search_range
from .sieve import (
    BlockPlan,
    RepBitmap,
    first_unrepresented,
    represents,
    sieve_all,
    sieve_progression,
)
