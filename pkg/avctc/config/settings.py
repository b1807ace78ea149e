"""
统一配置管理模块
基于 Pydantic Settings，支持环境变量自动注入和类型验证
"""

import math
from pathlib import Path

from pydantic import Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# 项目根目录
PROJECT_ROOT = Path(__file__).parent.parent.parent


class Settings(BaseSettings):
    """
    工具包配置类

    优先级（从高到低）：
    1. 环境变量
    2. .env 文件
    3. 代码中的默认值
    """

    # ==================== 应用配置 ====================
    APP_NAME: str = "avctc"
    APP_VERSION: str = "1.0.0"

    # ==================== 日志配置 ====================
    LOG_LEVEL: str = Field(default="INFO", description="日志级别")

    # ==================== 质量指标 ====================
    PSNR_CAP_DB: float = Field(
        default=100.0, description="MSE 为 0 时 PSNR 的截断值（dB），写入输出"
    )
    CIEDE2000_HIGHER_IS_BETTER: bool = Field(
        default=True, description="CIEDE2000 日志值是否已是越大越好的分数"
    )

    # ==================== BD-rate / 凸包 ====================
    PLANE_WEIGHT_A: float = Field(default=0.92, description="加权 BD-rate 的亮度权重 A")
    PLANE_WEIGHT_B: float = Field(default=0.04, description="加权 BD-rate 的色度权重 B")
    DENSIFY_INTERMEDIATE_POINTS: int = Field(
        default=7, ge=0, description="相邻 QP 之间插入的对数均匀中间点数"
    )

    # ==================== 重采样 ====================
    LANCZOS_ALPHA: int = Field(default=5, ge=1, description="Lanczos 窗口参数 α")
    FILTER_PRECISION_BITS: int = Field(default=14, ge=8, le=20, description="滤波系数定点精度")
    RESAMPLER_PHASES: int = Field(default=64, ge=1, description="多相滤波器相位数")

    # ==================== 任务执行 ====================
    DEFAULT_PARALLELISM: int = Field(default=4, ge=1, description="默认并发外部进程数")
    LEDGER_FILENAME: str = Field(default="jobs.ledger", description="任务台账文件名")

    # ==================== 输出格式 ====================
    REPORT_PERCENT_DECIMALS: int = Field(default=2, ge=0, description="报表百分比小数位")
    BITRATE_DECIMALS: int = Field(default=6, ge=0, description="码率序列化小数位")

    # ==================== 模型配置 ====================
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",  # 忽略额外的环境变量
    )

    # ==================== 验证器 ====================
    @field_validator("LOG_LEVEL", mode="before")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """日志级别统一为大写"""
        return str(v).upper()

    @model_validator(mode="after")
    def validate_plane_weights(self) -> "Settings":
        """平面权重必须满足 A + 2B = 1"""
        total = self.PLANE_WEIGHT_A + 2 * self.PLANE_WEIGHT_B
        if not math.isclose(total, 1.0, abs_tol=1e-12):
            raise ValueError(
                f"平面权重不满足 A + 2B = 1: A={self.PLANE_WEIGHT_A}, B={self.PLANE_WEIGHT_B}"
            )
        return self


# ==================== 全局配置实例 ====================
_settings: Settings | None = None


def get_settings() -> Settings:
    """
    获取配置实例（单例模式）
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


# 导出默认实例
settings = get_settings()
