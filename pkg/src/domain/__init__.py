"""
Domain module
Material parameter records and named parameter sets
"""
