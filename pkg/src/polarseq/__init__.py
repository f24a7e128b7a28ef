"""Polar code construction toolkit: the universal partial order on
synthetic-channel indices, base-expansion polarization weights with their
exact order breakpoints, Gaussian-approximation and erasure-channel
reliability oracles, and an SC/SCL decoding test bench."""

from polarseq.beta_expansion import (
    BetaInterval,
    BreakpointSet,
    PolarizationWeight,
    ReliabilitySequence,
    SignedZeroOnePolynomial,
    breakpoints,
    constraining_pairs,
    diff_polynomial,
    order_for_interval,
    pw_monomial,
    pw_value,
    rank_by_pw,
    refine_interval,
    roots_in_unit_to_two,
)
from polarseq.codec import (
    CodeConfig,
    crc_attach,
    crc_check,
    encode,
    sc_decode,
    scl_decode,
    select_frozen,
)
from polarseq.oracles import (
    BecReliability,
    GaReliability,
    bec_reliability,
    decide_pairs,
    ga_reliability,
    oracle_order,
)
from polarseq.partial_order import (
    ChannelIndex,
    PartialOrderSet,
    Relation,
    binary_expansion,
    cover_edges,
    incomparable_pairs,
    recursive_construct,
    upo_closure_oracle,
    upo_compare,
)
from polarseq.simulation import (
    BlerPoint,
    SimConfig,
    StudyStep,
    convergence_study,
    required_snr,
    run_bler,
    transmit,
)

__version__ = "0.1.0"
