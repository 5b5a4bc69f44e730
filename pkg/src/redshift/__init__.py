"""Spectral-sequence engine over F_p for the Tate, homotopy fixed point and
μ-localized spectral sequences of V(2) ∧ THH(BP⟨2⟩), and assembly of the
resulting TC and K generator tables."""

__version__ = "0.1.0"
