"""
Mechanics
Tensor algebra, hardening laws, return mapping and damage for one material point
"""
