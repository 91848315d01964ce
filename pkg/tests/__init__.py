"""
Test package for the VGT verifier.
"""
