"""
Simulate services package
"""
