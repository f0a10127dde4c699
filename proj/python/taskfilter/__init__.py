"""Select development tasks that resemble a target population and score
AutoML system changes on them."""

from taskfilter._core import (
    Change,
    ContrastSummary,
    FilterLossRecord,
    FilterSpec,
    ImprovementReport,
    PartitionPlan,
    RunRecord,
    RunStore,
    Task,
    TaskfilterError,
    TaskSet,
    contrast_filters,
    descriptor_similarity,
    eval_filter_over_plan,
    eval_system_change,
    expit,
    filter_log_loss,
    improvement_probability,
    ingest_runs,
    ingest_tasks,
    logit,
    oracle_similarity,
    pearson,
    sample_partitions,
    simulate_benchmark,
    spearman,
    welch_t_test,
    write_runs,
    write_tasks,
)

__all__ = [name for name in dir() if not name.startswith("_")]
