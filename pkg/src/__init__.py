"""Numerics for projective metrics, hidden Markov entropy rates and analyticity radius bounds."""
