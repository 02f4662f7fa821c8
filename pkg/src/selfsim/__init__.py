"""Steady self-similar solutions of 2-d hyperbolic systems near a supersonic state.

Profiles ``V(xi)``, ``xi = y/x``, are built from jumps and fans,
checked against the weak form and the entropy inequality, and classified
sector by sector.
"""

from .config import DEFAULT, Tolerances, load_tolerances
from .errors import SelfsimError
from .euler import EulerState, GammaLaw, CallableLaw, euler_system, mach_geometry
from .generator import Compression, Hold, Mutation, generate_backward, generate_forward, mutate, preset
from .profile import (
    Constant,
    FanPiece,
    Profile,
    SaltusDecomposition,
    SectorLayout,
    evaluate,
    left_limit,
    saltus_decompose,
    sector_layout,
    total_variation,
)
from .psystem import psystem
from .riemann import riemann_solution, riemann_strengths, solve_riemann, steady_riemann_2d
from .system import FieldInfo, Kind, RawSystem, SystemDef, make_system
from .verifier import (
    classify_structure,
    entropy_residual,
    lipschitz_at_resonance,
    verify_profile,
    weak_residual,
)
from .waves import (
    Fan,
    Wave,
    WaveKind,
    contact_wave,
    entropy_dissipation,
    lax_check,
    shock_curve,
    simple_wave_curve,
    wave_fan,
)

SimpleWavePiece = FanPiece

__version__ = "0.1.0"

__all__ = [
    "DEFAULT", "Tolerances", "load_tolerances", "SelfsimError",
    "EulerState", "GammaLaw", "CallableLaw", "euler_system", "mach_geometry", "psystem",
    "RawSystem", "SystemDef", "FieldInfo", "Kind", "make_system",
    "Wave", "WaveKind", "Fan", "shock_curve", "simple_wave_curve", "wave_fan", "contact_wave",
    "entropy_dissipation", "lax_check",
    "Profile", "Constant", "FanPiece", "SimpleWavePiece", "SectorLayout", "SaltusDecomposition",
    "evaluate", "left_limit", "sector_layout", "saltus_decompose", "total_variation",
    "riemann_solution", "riemann_strengths", "solve_riemann", "steady_riemann_2d",
    "weak_residual", "entropy_residual", "classify_structure", "lipschitz_at_resonance", "verify_profile",
    "generate_forward", "generate_backward", "Hold", "Compression", "Mutation", "mutate", "preset",
]
