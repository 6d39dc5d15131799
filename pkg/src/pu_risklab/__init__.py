"""Propensity-weighted risk estimation and excess-risk bounds for PU learning."""

__version__ = "0.1.0"
