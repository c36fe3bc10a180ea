"""Bounded feedback laws for the double integrator, their Lyapunov
certificates, a grid certifier and a fixed-step simulator."""

from .certifier import (CertificationReport, Region, Tolerances, certify, certify_beta_sweep,
                        gradient_check, zero_set_localization)
from .controllers import (ControllerConfig, Option, State, build_config, control, control_option1,
                          control_option2, theoretical_bound)
from .errors import (InputError, NotApplicableError, ParameterError, ReportError, SatCtlError,
                     SingularityError)
from .lyapunov import LyapunovEvaluation, lyap_option1, lyap_option2, lyapunov, matrix_lower_bound
from .sat_functions import (SaturationFunction, ShapingFunction, integral_of, make_atan_saturation,
                            make_shaping_xi, make_tanh_saturation, verify_sigma_membership,
                            verify_xi_properties)
from .simulator import Trajectory, rk4_step, simulate, sweep

__version__ = "0.1.0"
