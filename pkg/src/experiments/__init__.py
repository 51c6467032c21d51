"""
Experiment runner package for wsn-fusion
"""
