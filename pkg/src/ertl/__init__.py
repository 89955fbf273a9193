"""Extended relativistic Toda lattice laboratory.

Evolves recurrence coefficients of L-orthogonal polynomials under the
two-parameter exponential modification of a moment functional, and verifies
the structure backing the flow: the Lax pair commutator identity,
isospectrality of the finite truncation, closed-form coefficient families,
and the unit-circle reductions (kernel chain sequences and the Schur flow).
"""

from .errors import (BufferTooSmall, DegenerateKernel, ErtlError,
                     IndexOutOfTable, InvalidSupport, MismatchBeyondTolerance,
                     NonConvergence, NonConvergentIntegral, NotPositiveDefinite,
                     NotSymmetricState, PositivityLost, ReciprocalZero,
                     RegularityBreakdown, SingularDenominator, StepUnderflow,
                     ZeroVerblunsky)
from .measures import (MomentSpec, MomentTable, RegularityReport,
                       check_regularity, circle_kernel_spec,
                       circle_lebesgue_spec, compute_moments,
                       compute_moments_exact, discrete_spec, example1_spec,
                       example2_spec, explicit_table_spec, hankel_determinant)
from .lorth import (LPolySequence, RecurrenceCoeffs, bootstrap_recurrence,
                    eval_Q, orthogonality_residual, q_at_zero, tau,
                    triangle_from_coeffs)
from .lattice import (LatticeState, StepControl, Trajectory, integrate,
                      integrate_buffered, rhs_ertl, rhs_gamma, rhs_langmuir,
                      rhs_rtl1, rhs_rtl2, state_from_coeffs)
from .lax import (LaxPair, build_pair, commutator, hausdorff_distance,
                  isospectral_drift, lax_residual, spectrum)
from .circle import (CircleState, VerblunskySeq, cd_from_verblunsky,
                     integrate_cd, integrate_schur, kernel_coeffs,
                     map_beta_alpha_cd, map_cd_beta_alpha,
                     opuc_recurrence_coeffs, rhs_cd, rhs_schur, szego_values,
                     verblunsky_from_moments)
from .oracles import (ClosedFormExample, example1_coeffs, example2_coeffs,
                      fd_derivative)

__version__ = "0.1.0"
