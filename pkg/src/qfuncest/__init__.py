"""Simulation and bounds for quantum estimation of spatially varying phase functions.

Two estimators are provided: position-state (per-site phases plus kernel smoothing)
and wavenumber-state (postselected probe tomography), each in a separable (SQL) and an
entangled (Heisenberg) regime, together with the Fisher-information lower bounds they
are compared against.
"""

from .bounds import (BoundReport, PhaseVector, bound_report, heisenberg_lower, qfi_matrix,
                     resource_optima, sql_lower, uub, wbb)
from .function_model import (FourierSpectrum, GridFunction, SmoothnessClass, c0_constant,
                             fourier_constraint, fourier_transform, holder_seminorm,
                             inverse_fourier, mspe, periodic_modulus, sample_gaussian_process,
                             sample_target)
from .probe_sim import (KitaevConstants, PhaseEstimate, ProbeBudget, kitaev_multiscale_estimate,
                        noon_estimate, ramsey_sql_estimate)
from .ps_estimator import (SmoothingKernel, build_kernel, kernel_sum_rule_check, ps_estimate,
                           smoothed_target)
from .records import EstimationRecord
from .ws_estimator import (WavefunctionState, output_state, project_low_wavenumber,
                           simulate_tomography, ws_estimate)

__version__ = "0.1.0"
