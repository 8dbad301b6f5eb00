"""
Kraus-family channels on matrix algebras and their thermodynamic formalism.

A Kraus family ``{(w_i, K_i)}`` comes from an a-priori measure on matrices and
a map ``L``.  The package computes the channel it defines, its Perron data and
normalization, entropy and pressure, Gibbs channels, the projective Markov
kernel with its trajectories, and perturbations that restore irreducibility.
"""

from .channel import (Channel, IrreducibilityReport, SpectralData, irreducibility_report,
                      is_stochastic, normalize, spectral_data, time_average)
from .errors import (ConvergenceError, DimensionError, KrausThermoError, MeasureMismatchError,
                     NormalizationError, NotHermitianError, NotPositiveError, NotStochasticError,
                     SpecFormatError, SpectralError, TruncationError)
from .generic import (Classification, SubspaceBasis, distinct_spectrum_perturbation,
                      invariant_subspace_search, irreducible_perturbation, phi_erg_classify)
from .linalg import choi_matrix, dominant_eigenpair, hermitian_sqrt, hs_inner, kraus_superoperator
from .measure import (ConjugationByUnitary, Identity, KrausFamily, PriorMeasure, Table,
                      build_family, example1_family, four_projector_measure, from_gaussian_rotation,
                      from_markov_chain, truncate_infinite_family)
from .thermo import (entropy, gibbs_condition_check, gibbs_inequality_check, gibbs_maximizer,
                     potential_data, pressure, pressure_functional, transition_kernel)
from .trajectory import (EmpiricalMeasure, TrajectoryConfig, barycenter, feller_apply,
                         invariant_measure, kernel_step, markov_operator_apply, proj_distance,
                         quantum_trajectory, simulate, word_probability)

__version__ = "0.1.0"
