//! U-statistics with pluggable symmetric kernels.

pub mod kernel;
pub mod ustat;

pub use kernel::{gini_kernel, product_kernel, FnKernel, GiniKernel, Kernel, ProductKernel, MAX_DEGREE};
pub use ustat::{
    distributed_u_stat, distributed_u_stat_with, distributed_v_stat, hoeffding_alpha_hat,
    hoeffding_alpha_hat_rows, kernel_row_sums, size_weighted_mean, u_stat, u_stat_rows,
    u_stat_weighted, u_stat_weighted_rows, u_stat_with, v_stat, v_stat_rows, DistributedEstimate,
    Evaluation,
};
