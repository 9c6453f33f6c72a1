"""
Minenergy services package
"""
