# Foot Refinement

from .contact_groups import (
    FEET,
    LegChain,
    ContactGroup,
    ContactGroups,
    leg_chains,
    threshold_contacts,
    contact_runs,
    build_groups,
    build_contact_groups
)
from .foot_refiner import FootRefiner, retarget_foot, blend_airborne, refine_feet

__all__ = [
    'FEET',
    'LegChain',
    'ContactGroup',
    'ContactGroups',
    'leg_chains',
    'threshold_contacts',
    'contact_runs',
    'build_groups',
    'build_contact_groups',
    'FootRefiner',
    'retarget_foot',
    'blend_airborne',
    'refine_feet'
]
