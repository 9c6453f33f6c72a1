"""
Resilience services package
"""
