from cornerpd.pointproc.markov import (
    Trajectory,
    as_generator,
    ctmc_simulate_competing,
    ctmc_simulate_embedded,
    extract_sojourns,
    semi_markov_simulate,
    transient_distribution,
    uniformize,
    uniformized_simulate,
)
from cornerpd.pointproc.models import (
    Deterministic,
    Exponential,
    SojournModel,
    UniformInterval,
    Weibull,
    model_from_dict,
)
from cornerpd.pointproc.series import AcfEstimate, acf_estimate, map_states_pm, telegraph_simulate
from cornerpd.pointproc.streams import (
    EventStream,
    PoissonnessReport,
    SparseSummary,
    calibrate_ks_null,
    poisson_stats,
    sample_renewal,
    sparse_stream,
    sparse_superposition_experiment,
    superpose,
)

__all__ = [
    "AcfEstimate",
    "Deterministic",
    "EventStream",
    "Exponential",
    "PoissonnessReport",
    "SojournModel",
    "SparseSummary",
    "Trajectory",
    "UniformInterval",
    "Weibull",
    "acf_estimate",
    "as_generator",
    "calibrate_ks_null",
    "ctmc_simulate_competing",
    "ctmc_simulate_embedded",
    "extract_sojourns",
    "map_states_pm",
    "model_from_dict",
    "poisson_stats",
    "sample_renewal",
    "semi_markov_simulate",
    "sparse_stream",
    "sparse_superposition_experiment",
    "superpose",
    "telegraph_simulate",
    "transient_distribution",
    "uniformize",
    "uniformized_simulate",
]
