#!/usr/bin/env python3
"""avctc 命令行启动入口"""

import io
import sys

# 修复 Windows 控制台编码问题
if sys.platform == "win32":
    sys.stdout = io.TextIOWrapper(sys.stdout.buffer, encoding="utf-8", errors="replace")
    sys.stderr = io.TextIOWrapper(sys.stderr.buffer, encoding="utf-8", errors="replace")

from dotenv import load_dotenv

# 加载环境变量（LOG_LEVEL、PSNR_CAP_DB 等）
load_dotenv()

if __name__ == "__main__":
    from avctc.main import main

    sys.exit(main())
