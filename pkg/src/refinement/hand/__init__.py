# Hand Refinement

from .object_cloud import NUM_OBJECT_POINTS, ObjectCloud, estimate_normals
from .chamfer import nearest_neighbors, signed_distances, signed_chamfer, penetration_penalty
from .wrist_cone import wrist_cone_correct
from .arm_ik import right_arm_chain, arm_ik_follow
from .energies import ENERGY_TERMS, HandEnergy, Neighbors
from .hand_refiner import HandRefiner, refine_hand

__all__ = [
    'NUM_OBJECT_POINTS',
    'ObjectCloud',
    'estimate_normals',
    'nearest_neighbors',
    'signed_distances',
    'signed_chamfer',
    'penetration_penalty',
    'wrist_cone_correct',
    'right_arm_chain',
    'arm_ik_follow',
    'ENERGY_TERMS',
    'HandEnergy',
    'Neighbors',
    'HandRefiner',
    'refine_hand'
]
