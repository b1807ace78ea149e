"""AV2 CTC 评测工具包"""

__version__ = "1.0.0"
