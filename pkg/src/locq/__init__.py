"""locq: exact computations with finite simplicial sets, quasi-categories,
finitely presented path categories, sites with local lifting properties,
and higher dimensional automata.

Every procedure that depends on a word problem is three-valued: yes and
no always come with checkable certificates, unknown always names the
bound that stopped the search.
"""

__version__ = "0.1.0"
