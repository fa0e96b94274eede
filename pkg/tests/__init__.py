# Tests package for election-defense-solver
