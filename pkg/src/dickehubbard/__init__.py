"""Quantum phase transition and flat-band engine for the extended Dicke-Hubbard lattice."""
from .errors import (BoundaryNotFound, ContractViolation, DickeHubbardError, ModelInvalid,
                     NoStableSamples, NotApplicable, SuperradiantFrameInvalid, UnstableSolution)
from .model import (Branch, BlochMatrix, DisplacedFrame, Geometry, ModelParams, Sign,
                    bloch_stack, build_bloch, build_bloch_normal, build_bloch_super,
                    displaced_frame, form_factor, wrap_k)
from .bogoliubov import (BandSolution, PairingSet, analytic_bands_normal, chiral_defect,
                         diagonalize, pairing_correlators)
from .phase import (PhaseDiagram, Region, boundary_normal, boundary_super, classify,
                    crossing_points, intersection_curve_2d, lambda_sc, scan)
from .bands import (BandStructure, LdosHistogram, Mode, RealSpaceProfile, band_sweep,
                    bz_mesh_2d, bz_samples_1d, detect_flat_bands, ldos, real_space_profile)

__version__ = "0.1.0"
