"""Large-deviation analysis: Cramer functions, feasibility and tradeoff regions."""
