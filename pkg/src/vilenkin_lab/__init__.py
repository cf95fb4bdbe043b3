"""Fourier analysis on finite models of bounded Vilenkin groups."""

from .group import GroupSpec, Interval, ComplementCell, SpecError, parse_spec
from .transform import transform_fast, transform_naive, inverse_transform, vilenkin_fn, partial_sum
from .kernels import dirichlet, fejer_kernel, t_kernel, dirichlet_tail_kernel, convolve, l1_norm
from .summability import (
    WeightSeq, MeanFamily, make_weights, make_family, check_conditions, t_mean, norlund_mean,
    fejer_mean, riesz_mean, u_mean, v_mean, b_mean, cesaro_mean, norlund_log_mean,
)
from .hardy import (
    PAtom, AtomError, lp_quasinorm, weak_lp_quasinorm, maximal_function, hardy_quasinorm,
    make_random_atom, is_atom,
)
from .lab import (
    weight, maximal_op, maximal_report, domination_check, strong_convergence_sum,
    lemma_integral_check, sharpness_probe, MaximalReport, StrongConvergenceReport,
)

__version__ = "0.1.0"
