"""
Gramian services package
"""
