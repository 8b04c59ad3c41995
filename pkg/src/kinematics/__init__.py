# Kinematics Package

from .rotation import rot6d_to_matrix, matrix_to_rot6d, orthonormalize_rot6d, axis_angle_matrix, rotation_between
from .skeleton import (
    Skeleton,
    HandSpec,
    default_skeleton,
    BODY_JOINT_NAMES,
    RIGHT_HAND_JOINT_NAMES,
    FINGER_NAMES,
    CONTACT_FINGER_NAMES
)
from .pose import Pose, POSE_DIM, identity_vector, rotation_slice
from .forward_kinematics import forward_kinematics, global_transforms, wrist_local_finger_positions
from .hand_model import HandSurface, build_hand_surface, hand_surface_points, finger_keypoints
from .differentiable import fk_jacobian

__all__ = [
    'rot6d_to_matrix',
    'matrix_to_rot6d',
    'orthonormalize_rot6d',
    'axis_angle_matrix',
    'rotation_between',
    'Skeleton',
    'HandSpec',
    'default_skeleton',
    'BODY_JOINT_NAMES',
    'RIGHT_HAND_JOINT_NAMES',
    'FINGER_NAMES',
    'CONTACT_FINGER_NAMES',
    'Pose',
    'POSE_DIM',
    'identity_vector',
    'rotation_slice',
    'forward_kinematics',
    'global_transforms',
    'wrist_local_finger_positions',
    'HandSurface',
    'build_hand_surface',
    'hand_surface_points',
    'finger_keypoints',
    'fk_jacobian'
]
