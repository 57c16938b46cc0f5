"""Patient-level hospital case-cost estimation.

Five estimation models (relative-intensity weights and per-diem stay
costing), per-CMG aggregation, error analysis against a benchmark, and a
grid search for the per-diem stay coefficients.
"""

__version__ = "0.1.0"

from .aggregation import aggregate, hybrid_combine, model_stats, summarize
from .domain import (
    DEFAULT_BUCKETS,
    CaseCostWarning,
    CaseRecord,
    CmgStats,
    ErrorRecord,
    HospitalCostParams,
    ModelConfig,
    ModelId,
    PerformanceTable,
    Violation,
    validate_case,
)
from .evaluation import bucketize, compute_errors, evaluate_model, mean_abs_errors, performance_table
from .ingestion import (
    CostProcess,
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    load_dir,
    write_dataset,
)
from .models import (
    CaseEstimate,
    compute_pac_mod,
    estimate,
    estimate_m1,
    estimate_m2,
    estimate_m3,
    estimate_m4,
    estimate_m5,
    normalization_factor,
)
from .optimizer import CoefRange, CriterionVector, ExplicitGrid, GridSpec, criterion_vector, grid_search, lex_better
