"""
Risk Regions
============

Membership tests for risk regions with multiple implementations:
- MonotonicRegion: conservative region for monotonic losses
- EllipsoidRegion / ConeEllipticalRegion: exact regions for elliptical outcomes
- ScenarioMaskRegion: exact region of a finite scenario set
- WholeSpaceRegion: everything is risk
"""

from .region_interface import Orientation, RegionKind, RiskRegion, WholeSpaceRegion
from .monotonic_region import MonotonicRegion, contains_monotonic
from .elliptical_regions import (
    ConeEllipticalRegion,
    EllipsoidRegion,
    contains_cone_elliptical,
    contains_ellipsoid,
    orthant_nonrisk_probability,
)
from .discrete_oracle import (
    ScenarioMaskRegion,
    TailCheckResult,
    check_aggregation_preserves_tail,
    discrete_risk_region_oracle,
    linear_loss,
    portfolio_loss,
)

__all__ = [
    'Orientation', 'RegionKind', 'RiskRegion', 'WholeSpaceRegion',
    'MonotonicRegion', 'contains_monotonic',
    'ConeEllipticalRegion', 'EllipsoidRegion', 'contains_cone_elliptical', 'contains_ellipsoid',
    'orthant_nonrisk_probability',
    'ScenarioMaskRegion', 'TailCheckResult', 'check_aggregation_preserves_tail',
    'discrete_risk_region_oracle', 'linear_loss', 'portfolio_loss',
]
