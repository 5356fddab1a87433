"""LCS of a short random word against a long one, through particle dynamics and small games."""

from .particles import (
    ExpectantPartition, ParticleState, Trajectory, evolve_step, expectant_partition, q_step, run_dynamics,
    triviality_stats,
)
from .report import Check, EstimateReport
from .rng import RngStream
from .seqalgs import lcs_alignment, lcs_length, lcs_table, lnds, lnds_restricted
from .words import (
    DeletionBudgetVector, LazyWord, Word, WordExhausted, almost_contained, is_dvec_contained, is_subsequence,
    lcs_dominating_dvec, sample_word, standard_prefix, waiting_time,
)

__version__ = "0.1.0"

__all__ = [
    "Check", "DeletionBudgetVector", "EstimateReport", "ExpectantPartition", "LazyWord", "ParticleState",
    "RngStream", "Trajectory", "Word", "WordExhausted", "almost_contained", "evolve_step", "expectant_partition",
    "is_dvec_contained", "is_subsequence", "lcs_alignment", "lcs_dominating_dvec", "lcs_length", "lcs_table",
    "lnds", "lnds_restricted", "q_step", "run_dynamics", "sample_word", "standard_prefix", "triviality_stats",
    "waiting_time",
]
