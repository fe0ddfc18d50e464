"""Z2 lattice gauge theory on graphs and adiabatic Hamiltonian cycle search."""

__version__ = "0.1.0"
