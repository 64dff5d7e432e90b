"""Multiclass classification toolkit and benchmark for CDS proxy construction.

The package builds feature datasets from market panels of illiquid and liquid
counterparties, trains a family of from-scratch classifiers to associate each
observation with a liquid reference name, and scores them with stratified
K-fold cross validation against two industry baseline proxy methods.
"""

__version__ = "0.1.0"
