"""
数据模型测试
"""
