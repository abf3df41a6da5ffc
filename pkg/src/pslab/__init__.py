"""pslab: desk-scale experiments on Piatetski-Shapiro prime weights,
exponential sums, nilsequences, and sieve majorants."""

__version__ = "0.1.0"

from .ps_core import PSParameter, MembershipCertificate, ps_indicator, ps_enumerate, lambda_gamma
from .sieve import build_wtrick, sieve_segment, von_mangoldt_table

__all__ = [
    "__version__",
    "PSParameter",
    "MembershipCertificate",
    "ps_indicator",
    "ps_enumerate",
    "lambda_gamma",
    "build_wtrick",
    "sieve_segment",
    "von_mangoldt_table",
]
