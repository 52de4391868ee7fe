"""
工具层测试
"""
