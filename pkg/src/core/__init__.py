# Core operators: kernels, lattice algebra, quadrature, max-min operators
