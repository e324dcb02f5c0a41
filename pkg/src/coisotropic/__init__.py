"""Exact and numerical tools for cosymplectic and precosymplectic structures.

Submodules:

* ``forms``      polynomial differential forms on a chart
* ``coslinalg``  exact linear algebra of (pre)cosymplectic vector spaces
* ``thicken``    coisotropic thickening of a precosymplectic chart structure
* ``moser``      relative Poincare primitives and Moser flows
* ``cli``        the ``coisotropic`` command
"""
from .coslinalg import (
    CosymplecticLinearData,
    DarbouxBasis,
    SkewForm,
    Subspace,
    cosymplectic_complement,
    darboux_precosymplectic,
    darboux_presymplectic,
    direct_rank_check,
    flat,
    flat_inverse,
    is_coisotropic,
    lagrangian_normal_form,
    reeb_linear,
    skew_rank_kernel,
    symplectic_complement,
)
from .flow import FlowResult, integrate_flow
from .forms import Chart, PolyForm, PolyMap, PolyVectorField, d, evaluate, interior, pullback, wedge
from .moser import (
    SubmanifoldSpec,
    eta_stage,
    omega_stage,
    poincare_primitive,
    reeb_primitive,
    verify_equivalence,
)
from .polynomial import PolyScalar
from .report import Check, EquivalenceReport
from .thicken import (
    PrecosymplecticChartStructure,
    characteristic_distribution,
    choose_complement,
    liouville_form,
    thickened_structure,
    verify_embedding,
)

__version__ = "0.1.0"
