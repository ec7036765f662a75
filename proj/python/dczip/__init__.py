"""Degree-corrected zero-inflated Poisson blockmodels for count-weighted networks."""

from dczip._core import (  # noqa: F401
    BlockParams,
    DataError,
    FitOptions,
    FitResult,
    IclRow,
    IclTable,
    NumericalError,
    Partition,
    SparsityMode,
    VariationalState,
    WeightedDigraph,
    __version__,
    complete_log_likelihood,
    compute_alpha,
    e_step,
    ecm_m_step,
    elbo,
    expected_strengths,
    fit_vem,
    hard_assign,
    icl_score,
    kmeans_normalized_rows,
    kmeans_rows,
    nmi,
    read_edge_list,
    read_params,
    sample_network,
    select_k,
    spectral_partition,
    tau_from_partition,
    update_pi,
    write_edge_list,
    write_fit,
    write_params,
    zip_log_pmf,
)
