"""配置管理模块

提供统一的配置管理接口，支持：
- 环境变量自动加载
- 类型验证
- CTC 常量表（QP、帧数、AS 分辨率阶梯、报表分组）
"""

from .settings import get_settings, settings

__all__ = ["settings", "get_settings"]
