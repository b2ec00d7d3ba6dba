"""Cold-rolling pressure and roll-deflection simulation for 316L strip."""
