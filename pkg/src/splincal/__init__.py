"""splincal: Frobenius splittings, compatible ideals and trace obstructions
for explicit rings F_p[x1..xn]/I."""

__version__ = "0.1.0"
