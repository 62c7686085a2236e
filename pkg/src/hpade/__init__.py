"""Row sequences of type-II Hermite-Pade approximants.

Build simultaneous rational approximants with a common denominator at
arbitrary precision, track the denominator zeros across the row, and
classify which limit points are poles or other singularities of the
underlying system of power series.
"""

__version__ = "0.1.0"

from .coefficients import Coefficient
from .errors import (ConfigError, HpadeError, HypothesisUnmet,
                     RootFindingError, SeriesError, SolveError,
                     StructureError, WindowError)
from .expressions import parse_series
from .series import (ExpSeries, LogShift, MultiIndex, PolySeries, PowerSeries,
                     RationalSeries, SeriesSystem, SqrtBranch, poly_combo,
                     series_add, series_mul)
from .solver import (HPApproximant, build_constraint_matrix, hp_approximant,
                     numerators, pade, reduce_common_zeros, solve_denominator)
from .roots import RootSet, order_by_distance, roots
from .trajectory import (LambdaMu, RateEstimate, ZeroTrajectory,
                         build_trajectories, collect, estimate_rate,
                         estimate_theta, lambda_mu, match,
                         ordered_distance_table)
from .incomplete import (IncompletePair, IncompleteRecord, Regularization,
                         RmStarEstimate, estimate_rm_star, hp_projection,
                         incomplete_record, lemma_probe, records_from_pairs,
                         regularize)
from .detectors import (ComboReport, SingularityClassification,
                        SuetinReport, SystemPoleReport, classify_zeros,
                        combo_singularity_count, detect_system_poles,
                        fabry_ratio, suetin_scalar, verify_attraction)
from .runner import RunConfig, report, run, verify
