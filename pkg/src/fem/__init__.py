"""
Finite elements
Hex8 meshes, Helmholtz regularization, equilibrium assembly and the staggered solver
"""
