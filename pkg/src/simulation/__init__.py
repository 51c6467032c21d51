"""
Monte Carlo package for wsn-fusion
"""
