"""Default numerical tolerances shared by every module and the CLI."""

from dataclasses import asdict, dataclass

TOL_QUAD = 1e-8
TOL_MEMBER = 1e-6
TOL_DERIV = 1e-6
SLOPE_TOL = 0.05
SLOPE_MIN = 0.5
I_MAX = 14
MAX_INTERVALS = 2**20


@dataclass(frozen=True)
class Tolerances:
    tol_quad: float = TOL_QUAD
    tol_member: float = TOL_MEMBER
    tol_deriv: float = TOL_DERIV
    slope_tol: float = SLOPE_TOL
    slope_min: float = SLOPE_MIN
    i_max: int = I_MAX

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ValueError(f"tolerance {name!r} must be positive, got {value!r}")

    def to_dict(self) -> dict:
        return asdict(self)
