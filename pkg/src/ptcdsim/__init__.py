"""Outage simulation for power-time channel diversity (PTCD) and classic
diversity benchmarks over Rayleigh and Nakagami-m fading."""

__version__ = "0.1.0"

from .errors import ConfigurationError, DegenerateRegimeWarning, LowEventCountWarning
from .fading import ChannelRealization, FadingKind, FadingModel, sample_block, sample_power
from .transceiver import (InterleaverSet, PowerWeights, SiinrBreakdown, WaveformFrame,
                          apply_channel, build_interleavers, make_frame,
                          measure_waveform_siinr, random_frame, siinr_from_powers,
                          siinr_per_branch, superpose, total_siinr)
from .outage import (DiversityEstimate, OperatingPoint, OutageCurve, OutageEstimate,
                     OutagePoint, QosTarget, diversity_slope, outage_bound_rayleigh,
                     outage_monte_carlo, validate_operating_point)
from .benchmarks import (BenchmarkKind, BenchmarkScheme, cooperative_outage, direct_outage,
                         stbc_outage)
from .engine import PtcdScheme, SweepConfig, SweepResult, reference_bound_curve, run_sweep

#: Power weights used for the L = 2, 3, 4 reference configurations.
DEFAULT_WEIGHTS = {
    2: (0.8, 0.2),
    3: (0.9, 0.09, 0.01),
    4: (0.8, 0.15, 0.04, 0.01),
}
