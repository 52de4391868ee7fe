"""
服务层测试
"""

