"""Photonic quantum walk simulator in the spin-orbit (polarization + OAM)
space of a single light beam: exact lattice evolution, band structure and
topology, Gaussian wavepacket dynamics, two-photon interference, radial-mode
error channels and holographic state preparation."""

__version__ = "0.1.0"

from .errors import (AmplitudeRangeError, DegenerateBandError,
                     EmptyDistributionError, NotPlanarError, QuadratureError,
                     TruncationError, TwistwalkError, ValidationError,
                     WindowError, ZeroCountError, ZeroEfficiencyError)
from .lattice import (PolState, QPlate, SpinOrbitState, StepSequence, WavePlate,
                      apply_qplate, apply_step, apply_waveplate,
                      coin_walker_entanglement, evolve, full_distribution,
                      make_localized_state, oam_marginal)
from .metrics import CountRecord, poisson_sigma, sample_counts, similarity, tvd
from .multiphoton import (JointDistribution, ModeIndex, SingleParticleUnitary,
                          classical_inequality_T, dpt_joint, ipt_joint,
                          lift_walk_unitary, photon_inequality_T,
                          violation_significance)
from .photonics import (HologramMap, RadialExpansion, efficiency_correction,
                        gouy_step_dephasing, lg_amplitude, make_hologram,
                        pupil_overlap, pupil_plane_action,
                        qplate_radial_coefficients)
from .spectral import (BandStructure, BlochOperator, bloch_operator,
                       closed_form_omega, closed_form_velocity, dispersion,
                       eigenstate_circle, group_velocity, winding_number)
from .wavepacket import (WavepacketSpec, brillouin_sweep, cat_split,
                         make_wavepacket, mean_oam, propagate, variance)
