""" Median-of-means estimators for mean vectors, covariance matrices, and halfspace depth. """

VERSION = '1.0.0'
