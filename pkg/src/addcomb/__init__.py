"""Exact-arithmetic toolkit for additive combinatorics experiments:
sumsets and difference sets, representation functions and higher-order
energies, the fourth-moment density functional, convolution-operator
matrices with exact traces and spectra, finite-field point-line
incidence counts, and a verification harness that checks the exact
identities and explicit-constant inequalities tying them together.
"""

from .groups import (
    GroupCtx,
    GSet,
    make_ctx,
    sumset,
    diffset,
    prodset,
    ratioset,
    translate,
    translate_intersect,
    union,
    negate,
    set_to_json,
    set_from_json,
    load_set,
    dump_set,
)
from .convolution import (
    CountFn,
    indicator,
    delta,
    convolve,
    repr_fn,
    moment,
    self_convolve_pow2,
    countfn_to_json,
    countfn_from_json,
)
from .energies import (
    EnergyRecord,
    energy,
    energy_record,
    t_k,
    quad_identity,
    lem1_identity,
    cross_energy_identity,
)
from .structure import (
    D4Estimate,
    DyadicLevel,
    PopularSet,
    d4_ratio,
    d4_exact_small,
    d4_family_search,
    dyadic_decompose,
    popular_set,
)
from .operators import (
    SymMat,
    RectMat,
    Spectrum,
    build_t_matrix,
    build_k_rect,
    factorization_check,
    trace_power,
    spectrum_of,
    rayleigh_uniform,
    pidentity_check,
    eigen_lemma_check,
    spectral_energy_lemma_check,
)
from .incidence import (
    Line,
    LineSet,
    IncidenceInstance,
    ChainResult,
    count_incidences,
    count_incidences_oracle,
    sz_terms,
    sz_bound,
    make_instance,
    energyreduction_chain,
)
from .families import FamilySpec, FAMILY_NAMES, generate, is_sidon, random_subset
from .harness import (
    CheckRow,
    VerificationReport,
    VerifyOptions,
    SweepRow,
    verify_all,
    verify_batch,
    sweep,
    write_report_csv,
    write_sweep_csv,
)

__version__ = "0.1.0"
