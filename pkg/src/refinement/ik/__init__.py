# Inverse Kinematics

from .two_bone_ik import IKChain, TwoBoneSolution, solve_two_bone, apply_chain_deltas, two_bone_ik

__all__ = ['IKChain', 'TwoBoneSolution', 'solve_two_bone', 'apply_chain_deltas', 'two_bone_ik']
