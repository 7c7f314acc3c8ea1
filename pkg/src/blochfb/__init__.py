"""blochfb: monitored-qubit Bloch dynamics with measurement-feedback control.

Subsystems
----------
reservoir
    Bath spectral density, memory kernels, time-dependent decay rates.
bloch
    State representations, superoperators, drift/diffusion of the
    monitored qubit, coherence diagnostics.
sde
    Reproducible Euler-Maruyama trajectory integration (compiled kernel
    with a pure-Python fallback, selected in blochfb.backend).
control
    Forward-backward sweep for the two-point boundary-value optimality
    system; adjoint gradient verification; feedback-policy packaging.
ensemble
    Monte Carlo ensembles, controlled-vs-free comparisons, temperature
    scans of the coherence decay.
cli
    Configuration-driven command line producing CSV artifacts.
"""

from .backend import active_backend, available_backends, set_backend
from .bloch import (
    BlochState,
    ControlInput,
    Mode,
    bloch_from_density,
    coherence_factor,
    density_from_bloch,
    diffusion,
    dissipator,
    drift,
    matrix_drift_oracle,
    meas_superop,
    populations,
    target_state,
)
from .control import (
    CostateTrajectory,
    ControlTrajectory,
    OCConfig,
    OCResult,
    costate_rhs,
    feedback_policy,
    forward_backward_sweep,
    gradient_check,
    stationarity_control,
    total_cost,
)
from .ensemble import (
    CompareModesResult,
    EnsembleStats,
    TemperatureScan,
    compare_modes,
    run_ensemble,
    temperature_scan,
)
from .policies import CostateFeedbackPolicy, OpenLoopPolicy, ZeroPolicy, ZERO_POLICY
from .reservoir import (
    CoefficientTable,
    QuadratureConfig,
    ReservoirParams,
    ResourceLimitError,
    build_coefficient_table,
    damping_coefficient,
    diffusion_coefficient,
    dissipation_kernel,
    markov_rates,
    noise_kernel,
    spectral_density,
)
from .sde import (
    IntegrationError,
    IntegratorConfig,
    TrajectoryRecord,
    em_step,
    integrate_deterministic,
    simulate,
    wiener_increments,
)

__version__ = "0.1.0"
