"""Tensor completion by tensor-train weighted optimization (TT-WOPT).

The heavy lifting lives in the compiled extension; this package just
re-exports it. Arrays cross the boundary as float64; tensors are laid out
colexicographically (Fortran order), and any input array is converted as
needed.
"""

from ._ttwopt import (
    __version__,
    complete,
    detensorize,
    finite_diff_gradient,
    full,
    gen_cp_problem,
    gen_mask,
    gradient,
    init_cores,
    objective,
    optimize_cores,
    psnr,
    read_ppm,
    read_tensor,
    rse,
    tensorize,
    write_ppm,
    write_tensor,
)

__all__ = [
    "__version__",
    "complete",
    "detensorize",
    "finite_diff_gradient",
    "full",
    "gen_cp_problem",
    "gen_mask",
    "gradient",
    "init_cores",
    "objective",
    "optimize_cores",
    "psnr",
    "read_ppm",
    "read_tensor",
    "rse",
    "tensorize",
    "write_ppm",
    "write_tensor",
]
