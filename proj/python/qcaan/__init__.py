"""Python access to the qcaan benchmark core."""

from ._qcaan import (
    QcaanError,
    bayesian_bootstrap_mean,
    born_probabilities,
    compute_metadata,
    config_hash,
    discriminator_hidden_dims,
    dunn_test,
    evaluate,
    fit_logistic_scores,
    generator_hidden_dims,
    hdi,
    kruskal_wallis,
    load_dataset,
    minmax_scale,
    qcaan_oversample,
    random_oversample,
    report_from_counts,
    run_experiment1,
    sample_bitstrings,
    sinkhorn_divergence,
    smote,
    train_qcbm,
    write_demo_datasets,
)

__all__ = [name for name in dir() if not name.startswith("_")]
