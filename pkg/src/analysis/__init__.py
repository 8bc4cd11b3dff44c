# Convergence diagnostics and Orlicz modular analysis
