"""
Driver
Load protocols, scenario files, material-point and FE runs, CSV export and sweeps
"""
