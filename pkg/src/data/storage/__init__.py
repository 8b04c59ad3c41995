# Data Storage Package

from .motion_storage import (
    SceneSpec,
    StorageManager,
    frame_from_dict,
    frame_to_dict,
    load_cloud,
    load_motion,
    load_scene,
    load_skeleton,
    save_cloud,
    save_motion,
    save_scene,
    save_skeleton
)

__all__ = [
    'SceneSpec',
    'StorageManager',
    'frame_from_dict',
    'frame_to_dict',
    'load_cloud',
    'load_motion',
    'load_scene',
    'load_skeleton',
    'save_cloud',
    'save_motion',
    'save_scene',
    'save_skeleton'
]
