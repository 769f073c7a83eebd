"""Numerical core: Fock kernel, coherent-state algebra, traces, Wigner, SHG and spectrometer."""

from gcss.physics.errors import (
    ConfigurationError,
    DegenerateBatchError,
    DimensionMismatchError,
    GcssError,
    IntegratorError,
    NullStateError,
    NumericalError,
    TruncationError,
)
from gcss.physics.coherent import CoherentSuperposition, CompositeAmplitude, PulseParams
from gcss.physics.states import GcssParams
from gcss.physics.autocorr import Trace, TraceMetrics
from gcss.physics.wigner import PhaseGrid, WignerField
from gcss.physics.shg import ShgSystem, ShgTrajectory
from gcss.physics.qspec import PnHistogram, QspecParams, ShotBatch

__all__ = [
    'GcssError',
    'ConfigurationError',
    'NumericalError',
    'TruncationError',
    'NullStateError',
    'IntegratorError',
    'DimensionMismatchError',
    'DegenerateBatchError',
    'PulseParams',
    'CompositeAmplitude',
    'CoherentSuperposition',
    'GcssParams',
    'Trace',
    'TraceMetrics',
    'PhaseGrid',
    'WignerField',
    'ShgSystem',
    'ShgTrajectory',
    'QspecParams',
    'ShotBatch',
    'PnHistogram',
]
