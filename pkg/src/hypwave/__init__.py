"""Wave-equation boundary identities on the hyperbolic (Minkowski) plane."""

__version__ = "0.1.0"

from .errors import (ConfigError, DegenerateConfig, ExtrapolationUnstable, HypwaveError,
                     NearCharacteristic, NoConvergence, OutOfSector, RhoTooLarge,
                     SpacelikeSeparation)
from .hypcore import (ORIGIN, CharCoords, HPoint, LocalFrame, carnot_r2, hangle_of, hdistance,
                      hrotate, squared_interval)
from .geom import (DependenceConfig, Hyperbola, Opening, RhoAngles, apollonius_ratio, c_function,
                   dependence_points, rho_angles, symmetric_point)
from .fields import (CharPolynomial, DAlembertField, Profile, ScalarField, constant_field,
                     coordinate_field, dalembert, log_r_field, manufactured, random_dalembert,
                     wave_operator)
from .quad import (Check, QuadSpec, Region, RegionKind, arc_integral, closed_flux_check,
                   gauss_identity_residual, green_identity_residual, normal_flux, region_integral)
from .poisson import (LimitSchedule, boundary_sum_limit, final_identity, finite_rho_identity,
                      kernel, kernel_integral_closed_form, mean_limit, mean_on_I,
                      theta_range_ratio)
from .nonhomog import (SourceProblem, area_limit_terms, combined_identity_finite,
                       nonhomog_final_identity)
