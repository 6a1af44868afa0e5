"""Energy-efficiency maximization for an RIS-aided multi-user uplink."""

from .scenario import (SystemScenario, ChannelSet, PowerModel, dbm_to_watt, noise_power,
                       path_loss_gain, rician_channel, build_cascades, generate_drop,
                       total_static_power, default_scenario, desk_scenario)
from .metrics import (Allocation, sinr, sinr_all, rates_and_gee, mmse_filter, mmse_filters,
                      sr_mmse, sr_mmse_determinant, gee_mmse, make_allocation)
from .surrogates import (ratio_log_bound, gamma_surrogate_coeffs, gamma_surrogate,
                         gamma_quadratic_model, power_surrogate_gee, sr_surrogate_X,
                         sr_mmse_of_X, power_surrogate_gee_mmse)
from .kernels import (SolverOptions, ConvergenceTrace, max_linear_minus_quadratic_ball,
                      dinkelbach, box_projected_ascent, project_psd_trace_ball,
                      psd_projected_ascent, extract_rank_one)
from .algorithms import (MethodConfig, optimize_gamma_sca, optimize_power_sfp,
                         algorithm_one, optimize_gamma_sdr, optimize_power_mmse,
                         algorithm_two, baseline_uniform_random, run_method,
                         make_reflection_constraint, GlobalReflection, LocalReflection)
from .harness import (ExperimentConfig, ResultRecord, run_experiment, summarize,
                      write_csv, csv_text, splitmix64)
from .cli import cli

__version__ = "0.1.0"
