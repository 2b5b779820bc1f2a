"""Agile Earth observation constellation scheduling for continuous monitoring."""
