"""Beamspace reception for large uniform linear arrays.

Array geometry and DFT windowing live in :mod:`~beamspace_lab.array_core`,
channels in :mod:`~beamspace_lab.channel_model`, user placement in
:mod:`~beamspace_lab.scheduling`, linear receivers in
:mod:`~beamspace_lab.receiver`, mean-interference analysis in
:mod:`~beamspace_lab.stochastic` and wideband spectral efficiency in
:mod:`~beamspace_lab.wideband`.
"""

__version__ = "0.1.0"

from .array_core import (  # noqa: E402
    ArrayConfig,
    BeamspaceWindow,
    GridPosition,
    beamspace_transform,
    capture_lower_bound,
    dirichlet,
    energy_capture,
    locate_on_grid,
    place_window,
    steering_vector,
    window_matrix,
    window_response,
)
from .channel_model import (  # noqa: E402
    PathRecord,
    UserChannel,
    WidebandConfig,
    load_paths,
    save_paths,
    synth_multipath,
)
from .receiver import ReceiverScene, lmmse_sinr, noise_limited_capture  # noqa: E402
from .scheduling import (  # noqa: E402
    GuardPolicy,
    InfeasibleScheduleError,
    check_field_of_view,
    max_users,
    sample_user_frequencies,
    schedule_users,
)
from .stochastic import (  # noqa: E402
    estimate_mean_interference,
    expected_sinr_lower_bound,
    sir_margin,
)
from .wideband import spectral_efficiency_report  # noqa: E402
