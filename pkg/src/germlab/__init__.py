"""germlab: divergent diagrams of plane maps, computed through their jets.

Modules
-------
jets          truncated power series in one and two variables
expr          expression parsing, evaluation and Taylor expansion
germs         singularity classes and pair-type classification
normal_forms  catalog forms and the (III,III) reduction
moduli        numerical solution of the boundary modulus equation
webs          web singular sets and the (VI,I) equivalence test
render        level-curve families as SVG or CSV
cli           the ``germlab`` command
"""

from .exceptions import GenericityError, GermlabError, NumericError, UsageError
from .expr import eval_numeric, parse, taylor
from .germs import PAIR_TAGS, PairDiagram, SingleDiagram, classify_pair, classify_single
from .jets import Jet1, Jet2, tolerance
from .normal_forms import catalog, catalog_text, reduce_III_III, verify_chain

__version__ = "0.1.0"

__all__ = [
    "GermlabError",
    "UsageError",
    "GenericityError",
    "NumericError",
    "Jet1",
    "Jet2",
    "tolerance",
    "parse",
    "eval_numeric",
    "taylor",
    "PAIR_TAGS",
    "SingleDiagram",
    "PairDiagram",
    "classify_single",
    "classify_pair",
    "catalog",
    "catalog_text",
    "reduce_III_III",
    "verify_chain",
]
