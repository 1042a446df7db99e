"""Density evaluation, downweighting, the WEM/WCEM engine and root selection."""
