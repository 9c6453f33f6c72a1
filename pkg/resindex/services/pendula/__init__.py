"""
Pendula services package
"""
