"""
Tests package for cascade_scope.
"""
