"""
Test suite initialization.
""" 