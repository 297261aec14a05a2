"""Exact contexts and noncommutative tensor products at desk scale.

Computer algebra for finite-dimensional associative algebras over exact
fields: verifying exact contexts, building the tensor ring T (x)_R S with
its canonical maps, computing Tor and projective dimensions, and deciding
the homological criteria that govern when the localization theta: B -> C
is homological.
"""

from .linalg import Field, Matrix
from .algebra import (
    Algebra, AlgebraElement, AlgebraMorphism, check_morphism, dual_numbers,
    field_algebra, make_algebra, matrix_algebra, opposite, product,
    subalgebra_from_spanning, triangular_algebra, truncated_polynomials,
)
from .modules import (
    Bimodule, Module, ModuleMorphism, bimodule_via, check_bimodule,
    end_algebra, hom_space, module_via, quotient_module, regular_module,
    tensor_over,
)
from .homology import (
    free_resolution, is_homological_up_to, is_ring_epimorphism,
    minimal_resolution, projective_dimension, radical, tor,
)
from .context import (
    ExactContext, check_exact_context, context_from_extension,
    context_from_milnor, context_from_morita, context_from_rigid,
    context_from_strictly_pure, is_exact_pair, is_rigid, tau_comparison,
)
from .nctensor import (
    build_beta, build_nc_tensor, build_theta, commutative_coincidence_check,
    nc_tensor_morita_oracle, nc_tensor_pure_oracle, pd_inequality_check,
    theorem1_criterion, verify_localization_properties,
)

__version__ = "0.1.0"
