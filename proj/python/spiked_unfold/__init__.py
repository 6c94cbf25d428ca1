"""Spiked matrix and tensor PCA: BBP predictions, unfolding estimators and Monte Carlo sweeps."""

from ._core import (
    algorithm1,
    beta_hat,
    critical_snr,
    empirical_resolvent,
    full_singular_values,
    master_equation_root,
    mp_density,
    mp_quantile,
    predict,
    run_sweep,
    sample_spiked_tensor,
    singular_density,
    stieltjes,
    tensor_critical_beta,
    top_singular_triple,
    unfold,
    unfolding_phi,
    vec_kron,
)

__all__ = [
    "algorithm1",
    "beta_hat",
    "critical_snr",
    "empirical_resolvent",
    "full_singular_values",
    "master_equation_root",
    "mp_density",
    "mp_quantile",
    "predict",
    "run_sweep",
    "sample_spiked_tensor",
    "singular_density",
    "stieltjes",
    "tensor_critical_beta",
    "top_singular_triple",
    "unfold",
    "unfolding_phi",
    "vec_kron",
]
