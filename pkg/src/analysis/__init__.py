"""
Analytic error-probability package for wsn-fusion
"""
