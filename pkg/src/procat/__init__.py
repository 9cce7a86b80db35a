"""Finite categories, tau-finite simplicial sets, and pro-object homotopy invariants.

Subpackages:

* ``fincat``    -- finite categories, functors, comma/Grothendieck constructions,
  cofilteredness and classical coinitiality checks, nerves, Reedy degrees.
* ``sset``      -- truncated/coskeletal simplicial sets, Kan and minimality
  checks, homotopy groups, exact homology and cohomology, mapping spaces.
* ``eilmac``    -- classifying spaces, Dold-Kan, Eilenberg-MacLane spaces,
  W-bar constructions, homotopy quotients, nilpotent-closure certificates.
* ``proeng``    -- pro-objects over effective cofinite posets, hom classes,
  reindexing, levelwise/special map classes, diagram factorization.
* ``profinite`` -- completion towers, pro-homology, mod-p cohomology testers.
* ``cli``       -- command line front end (``procat``).
"""

__version__ = "0.1.0"
