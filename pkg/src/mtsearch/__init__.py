"""Steerable hash-based pattern retrieval for multivariate time series."""

from .data import (
    MultivariateTimeSeries,
    Query,
    Window,
    WindowSet,
    downsample_track,
    extract_windows,
    load_csv,
    normalize_window,
)
from .distances import (
    DtwParams,
    dba_average,
    dtw_dependent,
    dtw_per_track,
    dtw_uts,
    euclidean,
)
from .feedback import (
    LabelSet,
    WeightState,
    classifier_weights,
    combine_weights,
    sample_weights,
    train_round,
    update_query,
)
from .lsh import (
    AtomicHashFunction,
    CandidateSet,
    CompoundHashFunction,
    LshConfig,
    LshModel,
    generate_candidates,
    generate_model,
    hash_code,
    hash_collision,
    projection_collision,
    score_candidates,
)
from .pipeline import (
    RetrievalResult,
    Session,
    build_session,
    feedback_round,
    replay_document,
    run_query,
    session_to_document,
    set_query,
    undo_redo,
)
from .sampling import SamplePlan, exploit_samples, explore_samples, table_summary

__version__ = "0.1.0"
