"""
System services package
"""
