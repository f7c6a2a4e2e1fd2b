"""Dimensions and Holder exponents for affine interval exchange maps of
periodic type: self-similar exchanges, their slope classification, the
closed-form dimension and regularity quantities, and Monte-Carlo oracles
cross-checking them."""

__version__ = "0.1.0"
