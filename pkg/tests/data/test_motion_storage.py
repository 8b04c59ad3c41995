# 文件格式测试用例

import json
from pathlib import Path

import numpy as np
import pytest

from common.errors import DataValidationError
from data.collectors.synthetic_collector import sphere_cloud
from data.storage.motion_storage import (
    SceneSpec,
    StorageManager,
    load_cloud,
    load_motion,
    load_scene,
    load_skeleton,
    save_cloud,
    save_motion,
    save_scene,
    save_skeleton
)
from kinematics.pose import identity_vector, rotation_slice
from kinematics.rotation import axis_angle_matrix, matrix_to_rot6d
from kinematics.skeleton import default_skeleton
from motion.sequence import MotionSequence

SCENES = Path(__file__).resolve().parents[2] / 'data' / 'scenes'


def sample_sequence(frames=5):
    params = np.stack([identity_vector([0.01 * i, 0.9, 0.0]) for i in range(frames)])
    params[:, rotation_slice(19)] = matrix_to_rot6d(axis_angle_matrix([0.3, 1.0, 0.2], 0.7))
    contact = np.tile([1.0, 0.0], (frames, 1))
    return MotionSequence(params, 30.0, contact)


class TestMotionFile:
    """
    动作文件测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.skeleton = default_skeleton()
        self.sequence = sample_sequence()

    def _frame_line(self, path, index):
        lines = Path(path).read_text(encoding='utf-8').splitlines()
        start = next(i for i, line in enumerate(lines) if line.strip().startswith('"frames"'))
        return lines, start + 1 + index

    def test_round_trip_is_exact(self, tmp_path):
        """
        测试保存后读回逐位一致
        """
        path = tmp_path / 'a.motion.json'
        save_motion(path, self.sequence, self.skeleton)
        loaded, skeleton = load_motion(path)
        assert np.array_equal(loaded.params, self.sequence.params)
        assert np.array_equal(loaded.contact_probs, self.sequence.contact_probs)
        assert loaded.fps == 30.0
        assert skeleton.to_dict() == self.skeleton.to_dict()

    def test_skeleton_reference_resolved_relative(self, tmp_path):
        """
        测试按相对路径引用骨架文件
        """
        save_skeleton(tmp_path / 'body.json', self.skeleton)
        save_motion(tmp_path / 'a.motion.json', self.sequence, 'body.json')
        _, skeleton = load_motion(tmp_path / 'a.motion.json')
        assert np.array_equal(skeleton.bone_lengths, self.skeleton.bone_lengths)

    def test_bad_frame_reports_line(self, tmp_path):
        """
        测试帧维度错误时报告帧序号与行号
        """
        path = tmp_path / 'a.motion.json'
        save_motion(path, self.sequence, self.skeleton)
        lines, index = self._frame_line(path, 2)
        lines[index] = lines[index].replace('"phi": [', '"phi": [9.0, ', 1)
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')

        with pytest.raises(DataValidationError) as excinfo:
            load_motion(path)
        assert excinfo.value.line == index + 1
        assert 'frame 2' in str(excinfo.value)

    def test_degenerate_rotation_rejected(self, tmp_path):
        """
        测试 6D 块退化的帧
        """
        path = tmp_path / 'a.motion.json'
        save_motion(path, self.sequence, self.skeleton)
        data = json.loads(path.read_text(encoding='utf-8'))
        data['frames'][1]['phi'] = [0.0] * 6
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(DataValidationError) as excinfo:
            load_motion(path)
        assert 'frame 1' in str(excinfo.value)

    def test_unknown_field_and_version(self, tmp_path):
        """
        测试多余字段与版本号
        """
        path = tmp_path / 'a.motion.json'
        save_motion(path, self.sequence, self.skeleton)
        data = json.loads(path.read_text(encoding='utf-8'))

        path.write_text(json.dumps(dict(data, extra=1)), encoding='utf-8')
        with pytest.raises(DataValidationError, match='unknown motion fields'):
            load_motion(path)

        path.write_text(json.dumps(dict(data, version=2)), encoding='utf-8')
        with pytest.raises(DataValidationError, match='unsupported version'):
            load_motion(path)

    def test_malformed_json_reports_line(self, tmp_path):
        """
        测试 JSON 语法错误的行号
        """
        path = tmp_path / 'broken.motion.json'
        path.write_text('{\n  "format": "graspmotion.motion",\n  "version": 1,,\n}\n', encoding='utf-8')
        with pytest.raises(DataValidationError) as excinfo:
            load_motion(path)
        assert excinfo.value.line == 3

    def test_missing_file(self, tmp_path):
        """
        测试文件不存在
        """
        with pytest.raises(DataValidationError):
            load_motion(tmp_path / 'missing.motion.json')

    def test_contact_shape_checked(self, tmp_path):
        """
        测试触地概率的形状
        """
        path = tmp_path / 'a.motion.json'
        save_motion(path, self.sequence, self.skeleton)
        data = json.loads(path.read_text(encoding='utf-8'))
        data['contact'] = data['contact'][:-1]
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(DataValidationError, match='contact has shape'):
            load_motion(path)


class TestCloudFile:
    """
    点云文件测试类
    """

    def setup_method(self):
        """
        测试方法设置
        """
        self.cloud = sphere_cloud([0.1, 0.9, 0.3], 0.04)

    def _rows(self):
        return np.hstack([self.cloud.points, self.cloud.normals])

    def test_round_trip(self, tmp_path):
        """
        测试点云读写
        """
        path = tmp_path / 'object.cloud.txt'
        save_cloud(path, self.cloud)
        loaded = load_cloud(path)
        assert np.array_equal(loaded.points, self.cloud.points)
        assert np.allclose(loaded.normals, self.cloud.normals, atol=1e-15)

    def test_wrong_point_count(self, tmp_path):
        """
        测试点数不是 4096
        """
        path = tmp_path / 'short.cloud.txt'
        np.savetxt(path, self._rows()[:4095], fmt='%.17g')
        with pytest.raises(DataValidationError, match='cloud has 4095 points, expected 4096'):
            load_cloud(path)

    def test_normal_tolerance(self, tmp_path):
        """
        测试法向在 1e-4 以内时接受并重新归一化
        """
        rows = self._rows()
        rows[:, 3:] *= 1.0 + 5e-5
        path = tmp_path / 'loose.cloud.txt'
        np.savetxt(path, rows, fmt='%.17g')
        loaded = load_cloud(path)
        assert np.allclose(np.linalg.norm(loaded.normals, axis=1), 1.0, atol=1e-12)

    def test_bad_normal_reports_line(self, tmp_path):
        """
        测试非单位法向的行号（首行为注释头）
        """
        rows = self._rows()
        rows[10, 3:] *= 1.01
        path = tmp_path / 'bad.cloud.txt'
        np.savetxt(path, rows, fmt='%.17g', header='graspmotion.cloud v1', comments='# ')
        with pytest.raises(DataValidationError) as excinfo:
            load_cloud(path)
        assert excinfo.value.line == 12

    def test_wrong_field_count(self, tmp_path):
        """
        测试每行字段数
        """
        path = tmp_path / 'bad.cloud.txt'
        path.write_text('0 0 0 1 0\n', encoding='utf-8')
        with pytest.raises(DataValidationError) as excinfo:
            load_cloud(path)
        assert excinfo.value.line == 1


class TestSceneFile:
    """
    场景文件测试类
    """

    def test_bundled_scenes(self):
        """
        测试附带的场景文件
        """
        sphere = load_scene(SCENES / 'desk_sphere.json')
        assert (sphere.seed, sphere.shape, sphere.size, sphere.scale) == (7, 'sphere', (0.04,), 1.0)
        box = load_scene(SCENES / 'shelf_box.json')
        assert box.shape == 'box'
        assert box.size == (0.03, 0.05, 0.03)
        assert box.scale == pytest.approx(0.95)

    def test_round_trip_and_resolve(self, tmp_path):
        """
        测试场景读写与相对路径解析
        """
        spec = SceneSpec(seed=3, shape='box', size=(0.02, 0.03, 0.04), scale=1.05, start_motion='start.motion.json')
        path = tmp_path / 'scene.json'
        save_scene(path, spec)
        loaded = load_scene(path)
        assert loaded == spec
        assert loaded.resolve('start_motion') == str(tmp_path / 'start.motion.json')
        assert loaded.resolve('cloud') is None

    def test_invalid_object(self, tmp_path):
        """
        测试未知形状与非正尺寸
        """
        path = tmp_path / 'scene.json'
        base = {'format': 'graspmotion.scene', 'version': 1, 'seed': 0}
        path.write_text(json.dumps(dict(base, object={'shape': 'cone', 'radius': 0.1})), encoding='utf-8')
        with pytest.raises(DataValidationError, match='unknown object shape'):
            load_scene(path)
        path.write_text(json.dumps(dict(base, object={'shape': 'sphere', 'radius': -0.1})), encoding='utf-8')
        with pytest.raises(DataValidationError, match='positive'):
            load_scene(path)


class TestSkeletonAndStorageManager:
    """
    骨架文件与存储管理器测试类
    """

    def test_skeleton_round_trip(self, tmp_path):
        """
        测试骨架读写
        """
        skeleton = default_skeleton(1.1)
        save_skeleton(tmp_path / 'skeleton.json', skeleton)
        assert load_skeleton(tmp_path / 'skeleton.json').to_dict() == skeleton.to_dict()

    def test_invalid_skeleton(self, tmp_path):
        """
        测试骨架校验错误带文件路径
        """
        data = default_skeleton().to_dict()
        data['bone_lengths'][3] = 0.0
        path = tmp_path / 'skeleton.json'
        path.write_text(json.dumps(data), encoding='utf-8')
        with pytest.raises(DataValidationError) as excinfo:
            load_skeleton(path)
        assert excinfo.value.path == str(path)

    def test_store_and_mark_failed(self, tmp_path):
        """
        测试阶段文件与失败标记
        """
        manager = StorageManager({'output_dir': str(tmp_path)})
        target = manager.store_motion('scene_000.generated', sample_sequence(), default_skeleton())
        assert target.exists()

        marker = manager.mark_failed('scene_000', 'refine_hand', DataValidationError('bad cloud'))
        record = json.loads(marker.read_text(encoding='utf-8'))
        assert record['stage'] == 'refine_hand'
        assert record['error_type'] == 'DataValidationError'
        assert target.exists()
