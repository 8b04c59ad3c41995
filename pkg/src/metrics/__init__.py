# Metrics Package
# 评估指标：END-MJD、PSKL-J、INTER-VOLUME、SKATING

from .end_mjd import end_mjd, mean_joint_distance
from .pskl import PSKL_FLOOR, joint_accelerations, power_spectrum, kl_divergence, pskl_j
from .skating import foot_speeds, skating, skating_from_positions
from .voxel import VOXEL_STEP, VoxelGrid, voxelize, voxelize_capsules, intersection_volume, inter_volume
from .motion_evaluator import MetricsReport, MotionEvaluator, save_reports, load_reports

__all__ = [
    'end_mjd',
    'mean_joint_distance',
    'PSKL_FLOOR',
    'joint_accelerations',
    'power_spectrum',
    'kl_divergence',
    'pskl_j',
    'foot_speeds',
    'skating',
    'skating_from_positions',
    'VOXEL_STEP',
    'VoxelGrid',
    'voxelize',
    'voxelize_capsules',
    'intersection_volume',
    'inter_volume',
    'MetricsReport',
    'MotionEvaluator',
    'save_reports',
    'load_reports'
]
