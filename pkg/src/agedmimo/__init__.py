"""Massive-MIMO matched-filter beamforming under aged CSIT.

Channel aging model, matched-filter beamformers (superimposed,
time-orthogonal, grouped-STBC), pessimistic gain bounds, outage-guaranteeing
power adaptation, and seeded Monte Carlo experiments.
"""

from .beamforming import (BeamformerKind, GroupingPlan, TxWeights, adjacent_grouping,
                          equivalent_channel, gstbc_weights, mrc_baseline_gain,
                          realized_gain, superimposed_mf, svd_single_stream,
                          time_orthogonal_mf, time_orthogonal_mf_recycling)
from .bounds import (BoundKind, BoundResult, chebyshev_lower_bound, chernoff_lower_bound,
                     chernoff_lower_bound_array, hardened_limit, polynomial_lower_bound)
from .channel import (AgingParams, DegenerateChannelError, SPEED_OF_LIGHT, aging_params,
                      bessel_j0, complex_normal, evolve, invert_bessel_j0, make_rng,
                      sample_initial_channel)
from .gainstats import (DeterministicGainError, GainDistribution, chernoff_log_objective,
                        chernoff_objective, gain_distribution, gstbc_moments,
                        mrc_distribution, optimal_t, superimposed_moments,
                        time_orthogonal_moments)
from .poweradapt import (BudgetMode, InfeasibleError, NormalApproxThreshold, PowerDecision,
                         ReliabilityBudget, TableThreshold, build_weights, isnr_threshold,
                         load_threshold_table, max_lag, run_power_adaptation, split_budget,
                         transmit_power)

__version__ = "0.1.0"
