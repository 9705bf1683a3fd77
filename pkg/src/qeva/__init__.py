"""Reference-free video-summary evaluation via multimodal QA.

A summary is scored on three criteria: Coverage (video-derived
multiple-choice questions answered from the summary), Factuality
(summary-derived claims verified against the video), and Chronology
(event-order questions answered from the summary). Each criterion is
the exact proportion of correct answers after two-stage question
filtering; the overall score is their arithmetic mean. The package
also ships tie-aware rank statistics, Krippendorff's alpha, BLEU and
ROUGE-L baselines, and a benchmark harness that correlates metric
scores with human annotations.
"""

from .core import (
    AnnotationRecord,
    ClaimCheck,
    Dimension,
    DimensionScore,
    FilterStatus,
    MediaRef,
    MultipleChoice,
    Origin,
    QAPair,
    QevaScore,
    SortTask,
    Summary,
    YesNo,
    canonical_dumps,
    read_jsonl,
    write_jsonl,
)
from .errors import (
    AuthError,
    BackendError,
    CapabilityError,
    ConfigError,
    DegenerateSample,
    EmptyDimension,
    EmptyInput,
    FixtureMiss,
    GenerationEmpty,
    InsufficientData,
    MissingAnnotation,
    ProtocolError,
    QevaError,
    ReferentialError,
    SchemaError,
    TimelineTooShort,
    TransportError,
    ValidationError,
)
from .scoring import (
    GradedAnswer,
    GradeRule,
    answer_questions,
    grade_answer,
    qeva_score,
    score_dimension,
)
from .filtering import (
    FilterConfig,
    FilterReport,
    context_filter,
    filter_pipeline,
    trivial_filter,
)
from .stats import (
    AgreementMetric,
    AlphaResult,
    CorrelationResult,
    kendall_exact_p,
    kendall_tau_b,
    kendall_tau_c,
    krippendorff_alpha,
    spearman_rho,
)
from .baselines import bleu_n, rouge_l, tokenize

__version__ = "0.1.0"
