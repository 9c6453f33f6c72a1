"""
resindex - resilience indices for LTI systems under adversarial disturbance
"""
