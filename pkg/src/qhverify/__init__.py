"""Exact verification of quantized Manin quadruples for the double of sl2."""
