"""
cwtoolkit - multi-echelon cyber-warfare game toolkit.

"""
__version__ = "0.1.0"
