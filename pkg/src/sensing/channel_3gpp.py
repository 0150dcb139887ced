"""
isac-fbl - 3GPP Line-of-Sight Channel
TR 38.901 LoS coefficients of a uniform linear array and their analytic
sensitivities to the user state (AoA theta, range r, radial velocity v).

    [H]_{j,i} = beta_i · exp(−j (2π/λ) d_a (j−1) sin theta_i)
                       · exp(−j (4π f_c / c) r_i)
                       · exp(+j (4π f_c v_i / c) t_obs),     t_obs = n T_s

Antenna indices are 1-based with the phase reference at element 1. Each phase
is applied as its own factor so the small spatial and Doppler phases are not
swamped by the large range phase.

Usage:
    >>> radio = RadioConfig()
    >>> states = default_user_states(4)
    >>> H = build_channel(states, radio)          # 10×4
    >>> J = build_jacobian(states, radio)         # 4 blocks of 10×3
"""

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from src.core.errors import InvalidSpecError
from src.sensing.crb import PARAMETER_NAMES, JacobianMatrix

logger = structlog.get_logger()

HALF_PI = math.pi / 2.0


# =============================================================================
# DOMAIN TYPES
# =============================================================================

class UserState(BaseModel):
    """Physical state of one user; beta is a known nuisance amplitude."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: float = Field(..., gt=-HALF_PI, lt=HALF_PI, description="Angle of arrival (rad)")
    r: float = Field(..., gt=0, description="Range (m)")
    v: float = Field(default=0.0, description="Radial velocity (m/s)")
    beta: complex = Field(default=1 + 0j, description="Complex path amplitude")

    def shifted(self, parameter: str, delta: float) -> "UserState":
        """Copy with one of aoa/range/velocity moved by delta."""
        attribute = {"aoa": "theta", "range": "r", "velocity": "v"}[parameter]
        # validated copy: a shift past ±π/2 or r <= 0 raises
        return UserState(**{**self.model_dump(), attribute: getattr(self, attribute) + delta})


class RadioConfig(BaseModel):
    """Carrier, timing and array parameters (defaults: 28 GHz, 4 μs, n=1000, m=10)."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    fc: float = Field(default=28e9, gt=0, description="Carrier frequency (Hz)")
    c: float = Field(default=3e8, gt=0, description="Propagation speed (m/s)")
    Ts: float = Field(default=4e-6, gt=0, description="Symbol duration (s)")
    n: int = Field(default=1000, ge=1, description="Channel uses in the observation")
    m: int = Field(default=10, ge=1, description="Receive antennas")
    d_a: Optional[float] = Field(default=None, gt=0, description="Element spacing (m); None = λ/2")

    @property
    def wavelength(self) -> float:
        return self.c / self.fc

    @property
    def t_obs(self) -> float:
        return self.n * self.Ts

    @property
    def element_spacing(self) -> float:
        """d_a, or half a wavelength so the aperture follows fc."""
        return self.wavelength / 2.0 if self.d_a is None else self.d_a


def default_user_states(k: int) -> List[UserState]:
    """
    Deterministic placement used by the CRB sweeps.

    theta evenly spaced strictly inside (−60°, 60°), r evenly spaced over
    [20, 200] m and v evenly spaced over [−30, 30] m/s.

    Example:
        >>> [round(math.degrees(s.theta)) for s in default_user_states(3)]
        [-30, 0, 30]
    """
    if k < 1:
        raise InvalidSpecError(f"k must be positive, got {k}")
    thetas = np.linspace(-math.pi / 3.0, math.pi / 3.0, k + 2)[1:-1]
    ranges = np.linspace(20.0, 200.0, k)
    velocities = np.linspace(-30.0, 30.0, k)
    return [
        UserState(theta=float(t), r=float(r), v=float(v))
        for t, r, v in zip(thetas, ranges, velocities)
    ]


# =============================================================================
# CHANNEL
# =============================================================================

def _antenna_offsets(radio: RadioConfig) -> np.ndarray:
    # (j − 1) for j = 1..m
    return np.arange(radio.m, dtype=float)


def _channel_column(state: UserState, radio: RadioConfig) -> np.ndarray:
    wavenumber = 2.0 * math.pi / radio.wavelength
    spatial = np.exp(-1j * wavenumber * radio.element_spacing * _antenna_offsets(radio) * math.sin(state.theta))
    ranging = np.exp(-1j * (4.0 * math.pi * radio.fc / radio.c) * state.r)
    doppler = np.exp(1j * (4.0 * math.pi * radio.fc * state.v / radio.c) * radio.t_obs)
    return complex(state.beta) * spatial * ranging * doppler


def _check_states(states: Sequence[UserState]) -> None:
    if len(states) == 0:
        raise InvalidSpecError("At least one user state is required")


def build_channel(states: Sequence[UserState], radio: RadioConfig) -> np.ndarray:
    """
    LoS channel matrix, one column per user.

    Returns:
        Complex m×k matrix; |H_{j,i}| = |beta_i|
    """
    _check_states(states)
    return np.column_stack([_channel_column(s, radio) for s in states])


# =============================================================================
# JACOBIAN
# =============================================================================

def sensitivity_factors(state: UserState, radio: RadioConfig) -> np.ndarray:
    """
    Purely imaginary per-antenna factors f with ∂H_{:,i}/∂P = H_{:,i} · f.

    Returns:
        m×3 array, columns aoa, range, velocity
    """
    wavenumber = 2.0 * math.pi / radio.wavelength
    aoa = -1j * wavenumber * radio.element_spacing * _antenna_offsets(radio) * math.cos(state.theta)
    ranging = np.full(radio.m, -1j * 4.0 * math.pi / radio.wavelength)
    doppler = np.full(radio.m, 1j * 4.0 * math.pi * radio.fc * radio.t_obs / radio.c)
    return np.column_stack([aoa, ranging, doppler])


def build_jacobian(states: Sequence[UserState], radio: RadioConfig) -> JacobianMatrix:
    """
    Analytic sensitivities of every user's channel column.

    With d_a = λ/2 the AoA factor is −jπ(j−1)cos theta; the range factor is
    −j4π/λ and the velocity factor +j4π f_c t_obs / c. beta is held constant.
    """
    _check_states(states)
    blocks = []
    for state in states:
        column = _channel_column(state, radio)
        blocks.append(column[:, None] * sensitivity_factors(state, radio))
    return JacobianMatrix(blocks=blocks, names=[PARAMETER_NAMES] * len(states))


def finite_difference_jacobian(
    states: Sequence[UserState],
    radio: RadioConfig,
    step: Union[float, Tuple[float, float, float]],
) -> JacobianMatrix:
    """
    Central-difference Jacobian (H(P + h e_j) − H(P − h e_j)) / 2h.

    Args:
        states: User states
        radio: Radio parameters
        step: One step for all parameters, or (h_theta, h_r, h_v)

    Raises:
        InvalidSpecError: if a step is not positive or pushes a state out of range
    """
    _check_states(states)
    steps = (step, step, step) if np.isscalar(step) else tuple(step)
    if len(steps) != len(PARAMETER_NAMES) or any(not h > 0 for h in steps):
        raise InvalidSpecError(f"step must be positive (scalar or 3-tuple), got {step}")

    blocks = []
    for state in states:
        columns = []
        for parameter, h in zip(PARAMETER_NAMES, steps):
            try:
                plus = _channel_column(state.shifted(parameter, h), radio)
                minus = _channel_column(state.shifted(parameter, -h), radio)
            except ValueError as exc:
                raise InvalidSpecError(
                    f"Step {h} moves {parameter} out of its valid range"
                ) from exc
            columns.append((plus - minus) / (2.0 * h))
        blocks.append(np.column_stack(columns))
    return JacobianMatrix(blocks=blocks, names=[PARAMETER_NAMES] * len(states))


# End of 3GPP Line-of-Sight Channel
