"""Free boundary price formation: transform method, FD reference, asymptotics."""

from .asymptotics import (
    AsymptoticLaw,
    DegenerateMasses,
    InsufficientPoints,
    NotZeroMass,
    ZeroDatum,
    classify_law,
    fit_sqrt_coefficient,
    limit_price_balanced,
    sqrt_drift_coefficient,
    tail_erf,
)
from .datum import (
    BadGrid,
    Datum,
    MassPair,
    MissingZero,
    SignViolation,
    ZeroMassPairError,
    make_datum,
    masses,
    preset,
    weighted_center,
)
from .heatflow import HeatField, NonpositiveTime, heat_kernel, segment_integrals
from .pricepath import (
    BracketFailure,
    PricePoint,
    PriceTrajectory,
    find_price,
    trajectory,
    transaction_rate,
)
from .refsolver import (
    DomainTooSmall,
    FDGrid,
    FDState,
    GridTooCoarse,
    Instability,
    init_state,
    solve,
    state_masses,
    step,
)
from .transform import (
    TransformedField,
    forward_transform,
    periodic_mean_levels,
    reconstruct_density,
)

__version__ = "0.1.0"
