"""Monte Carlo successive-cancellation simulation over erasure channels."""
