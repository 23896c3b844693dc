"""rydgate: dipole-dipole phase gates between two trapped neutral atoms.

Submodules:
    atomic     -- Stark states, dipole moments, interaction energy and force
    dynamics   -- two-atom internal Hamiltonian and propagation
    protocols  -- gate pulse sequences, dressed-state analytics, calibration
    motional   -- motional error bounds and joint internal (x) oscillator oracles
    scenario   -- scenario-file parsing and run orchestration
    cli        -- command-line front end
"""

__version__ = "0.1.0"

from .errors import (
    CalibrationError,
    ConvergenceError,
    DomainError,
    IntegrationError,
    RydgateError,
    ScenarioError,
)
from .units import Constants, Length, PhysicalContext, bohr, meters, mhz_to_rad_per_s
from .atomic import (
    InteractionGeometry,
    StarkState,
    dipole_dipole_energy,
    dipole_dipole_energy_extremal,
    dipole_force,
    dipole_moment,
    stark_shift,
)
from .dynamics import (
    BASIS,
    InternalModel,
    PulseSchedule,
    PulseSegment,
    Trajectory,
    TwoAtomState,
    build_hamiltonian,
    propagate,
)
from .protocols import (
    CalibrationResult,
    DressedCurves,
    GateAnalysis,
    GateReport,
    adiabatic_schedule,
    analyze_gate,
    calibrate,
    dressed_energies,
    entanglement_phase_integral,
    model_a_schedule,
    model_b_schedule,
    wrap_phase,
)
from .motional import (
    JointSimResult,
    KickDiagnostics,
    MotionalBudget,
    TrapSpec,
    kick_bound,
    model_a_kick,
    release_retrap,
    simulate_joint_kick,
    simulate_trap_mismatch,
    thermal_kick,
    thermal_trap,
    trap_mismatch_bound,
)

__all__ = [name for name in dir() if not name.startswith("_")]
