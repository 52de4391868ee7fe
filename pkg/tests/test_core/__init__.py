"""
核心功能测试
"""

