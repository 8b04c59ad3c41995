# Base Model Class
# 模型基类：统一的保存/加载接口（带版本与配置的 .npz 权重文件）

import json
import logging
import os
from typing import Any, Dict

import numpy as np

from common.errors import ConfigurationError, DataValidationError

WEIGHTS_VERSION = 1


class BaseModel:
    """
    基础模型类
    """

    def __init__(self, config=None):
        """
        初始化模型

        Args:
            config: 配置参数
        """
        self.config = config or {}
        self.logger = logging.getLogger(__name__)
        self.model = None
        self.model_path = './models'
        self.model_name = 'base_model'

    def build_model(self):
        """
        构建模型
        """
        raise NotImplementedError("Subclass must implement build_model method")

    def predict(self, *args, **kwargs):
        """
        预测
        """
        raise NotImplementedError("Subclass must implement predict method")

    def config_dict(self) -> Dict[str, Any]:
        """
        写入权重文件的配置
        """
        return dict(self.config)

    def save(self, path=None):
        """
        保存模型

        Args:
            path: 保存路径
        """
        if path is None:
            path = os.path.join(self.model_path, f"{self.model_name}.npz")

        try:
            os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
            self._save_model(path)
            self.logger.info(f"Model saved to {path}")
        except Exception as e:
            self.logger.error(f"Error saving model: {str(e)}")
            raise

    def load(self, path=None):
        """
        加载模型

        Args:
            path: 加载路径
        """
        if path is None:
            path = os.path.join(self.model_path, f"{self.model_name}.npz")

        if not os.path.exists(path):
            raise DataValidationError("weights file does not exist", path=str(path))
        try:
            self._load_model(path)
            self.logger.info(f"Model loaded from {path}")
        except Exception as e:
            self.logger.error(f"Error loading model: {str(e)}")
            raise

    def _named_weights(self):
        """
        (名称, 数组) 列表，顺序固定
        """
        raise NotImplementedError("Subclass must implement _named_weights method")

    def _assign_weights(self, arrays):
        raise NotImplementedError("Subclass must implement _assign_weights method")

    def _save_model(self, path):
        """
        保存为 .npz：w000__<变量名> ...、__config__（JSON）、__version__
        """
        payload = {}
        for index, (name, value) in enumerate(self._named_weights()):
            key = f"w{index:03d}__{name.replace('/', '.').replace(':', '.')}"
            payload[key] = value
        payload['__config__'] = np.array(json.dumps(self.config_dict(), sort_keys=True))
        payload['__version__'] = np.array(WEIGHTS_VERSION)
        with open(path, 'wb') as f:
            np.savez(f, **payload)

    @staticmethod
    def read_weights_file(path):
        """
        读取权重文件

        Returns:
            (配置字典, 按顺序排列的权重数组列表)
        """
        try:
            with np.load(path, allow_pickle=False) as data:
                files = list(data.files)
                if '__version__' not in files or '__config__' not in files:
                    raise DataValidationError("weights file lacks __version__ or __config__", path=str(path))
                version = int(data['__version__'])
                if version != WEIGHTS_VERSION:
                    raise DataValidationError(
                        f"unsupported weights version {version}, expected {WEIGHTS_VERSION}", path=str(path)
                    )
                config = json.loads(str(data['__config__']))
                keys = sorted(k for k in files if k.startswith('w') and '__' in k)
                arrays = [data[k] for k in keys]
        except (OSError, ValueError) as e:
            raise DataValidationError(f"cannot read weights: {str(e)}", path=str(path))
        return config, arrays

    def _load_model(self, path):
        config, arrays = self.read_weights_file(path)
        expected = self.config_dict()
        if config != expected:
            raise ConfigurationError(f"weights were trained with a different config: {config}")
        self._assign_weights(arrays)
