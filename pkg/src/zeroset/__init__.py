"""Zero-subset and uniqueness criteria for entire functions under subharmonic majorants."""

__version__ = "0.1.0"

from .tolerances import Tolerances
from .measures import (LineMeasure, RadialMeasure, ZeroSequence, GridFunction, RieszGrid,
                       build_distribution, riesz_fd, riesz_radial_counting, stieltjes_line,
                       stieltjes_radial)
from .potentials import (AveragedGreen, RadialLog, green_disk, potential_from_json,
                         verify_jensen_membership)
from .testfns import (LogCusp, SampledTest, kernel_K, poisson_extend, testfn_from_json,
                      verify_rp0_membership)
from .criteria import (Family, MajorantSpec, cartwright_functional, estimate_sup,
                       jensen_functional, smooth_majorant)
from .radial import (LogPowerQ, PowerMajorant, PowerQ, SampledMajorant, SampledQ,
                     check_q_admissible, integral_test_qM, log_mean_stieltjes, zero_tail_sum)
from .uniqueness import (PowerV, SampledV, must_vanish_verdict, tail_sum_verdict,
                         v_inequality_components, verify_v_membership)
from .oracle import Builtin, CanonicalProduct, jensen_check, selftest

__all__ = [
    "Tolerances", "LineMeasure", "RadialMeasure", "ZeroSequence", "GridFunction", "RieszGrid",
    "build_distribution", "riesz_fd", "riesz_radial_counting", "stieltjes_line",
    "stieltjes_radial", "AveragedGreen", "RadialLog", "green_disk", "potential_from_json",
    "verify_jensen_membership", "LogCusp", "SampledTest", "kernel_K", "poisson_extend",
    "testfn_from_json", "verify_rp0_membership", "Family", "MajorantSpec",
    "cartwright_functional", "estimate_sup", "jensen_functional", "smooth_majorant",
    "LogPowerQ", "PowerMajorant", "PowerQ", "SampledMajorant", "SampledQ",
    "check_q_admissible", "integral_test_qM", "log_mean_stieltjes", "zero_tail_sum", "PowerV",
    "SampledV", "must_vanish_verdict", "tail_sum_verdict", "v_inequality_components",
    "verify_v_membership", "Builtin", "CanonicalProduct", "jensen_check", "selftest",
]
