"""Nonlocal XOR-type games on square lattices.

Key layers:
  perm          permutations, shift/reflection families
  lattice       square lattices (plane/cylinder/torus), cells, dual, trees
  game          permutation labelings, switches, signatures, equivalence
  combinatorics matching, exact Steiner trees, defect partitions
  classical     exact classical values (three independent routes)
  sdpcore       dense interior-point semidefinite solver
  quantum       bipartite game extraction, exact d=2 value, NPA-1 upper
                bound, see-saw lower bound
  cli           nlgame command line: classify/classical/quantum/reproduce/gen
"""

from __future__ import annotations

__version__ = "0.1.0"
