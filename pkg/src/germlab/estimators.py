"""scikit-learn style wrappers around the functional API.

The germ computations are stateless, so ``fit`` mostly validates
parameters.  The wrappers exist so the tools drop into pipelines and
parameter searches; the free functions remain the primary interface.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from .exceptions import UsageError
from .germs import PAIR_TAGS, PairDiagram, SingleDiagram, classify_pair, classify_single
from .normal_forms import reduce_III_III
from .render import DiagramDocument


def _diagram(item, degree, exact):
    if isinstance(item, (PairDiagram, SingleDiagram)):
        return item
    if isinstance(item, dict):
        raw = dict(item, degree=degree, mode="exact" if exact else "float")
        return DiagramDocument.from_json(raw).to_diagram()
    if isinstance(item, DiagramDocument):
        return item.to_diagram()
    raise UsageError(f"cannot read a diagram from {type(item).__name__}")


class DiagramClassifier(ClassifierMixin, BaseEstimator):
    """Predicts the type tag of each diagram in ``X``.

    ``X`` holds PairDiagram/SingleDiagram objects or document dicts.
    ``fit`` learns nothing; ``classes_`` is the fixed tag list.
    """

    def __init__(self, degree=12, exact=True):
        self.degree = degree
        self.exact = exact

    def fit(self, X=None, y=None):
        if self.degree < 4:
            raise UsageError("degree must be at least 4")
        self.classes_ = np.array(list(PAIR_TAGS) + ["NONGENERIC"])
        return self

    def _check(self):
        if not hasattr(self, "classes_"):
            raise NotFittedError("call fit first")

    def classify(self, X):
        self._check()
        out = []
        for item in X:
            d = _diagram(item, self.degree, self.exact)
            out.append(classify_pair(d) if isinstance(d, PairDiagram) else classify_single(d))
        return out

    def predict(self, X):
        return np.array([c.tag for c in self.classify(X)], dtype=object)


class NormalFormReducer(TransformerMixin, BaseEstimator):
    """Maps (III,III) diagrams to their NormalFormResult."""

    def __init__(self, degree=12, exact=True, check_type=True):
        self.degree = degree
        self.exact = exact
        self.check_type = check_type

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def transform(self, X):
        if not getattr(self, "fitted_", False):
            raise NotFittedError("call fit first")
        return [reduce_III_III(_diagram(item, self.degree, self.exact), self.check_type) for item in X]


class ModuliSolver(RegressorMixin, BaseEstimator):
    """Evaluates the product solution a(x) for a fixed b.

    ``fit`` builds theta, c and sigma; ``predict`` takes x values (any
    array shape) and returns float values of a.
    """

    def __init__(self, b="1", radius=0.4, dps=40, target_eps=1e-30):
        self.b = b
        self.radius = radius
        self.dps = dps
        self.target_eps = target_eps

    def fit(self, X=None, y=None):
        from .moduli import make_triple

        self.triple_ = make_triple(self.b, dps=self.dps, radius=self.radius)
        return self

    def predict(self, X):
        from .moduli import a_product

        if not hasattr(self, "triple_"):
            raise NotFittedError("call fit first")
        x = np.asarray(X, dtype=float)
        flat = [float(a_product(self.triple_, v, self.target_eps)) for v in x.ravel()]
        return np.array(flat).reshape(x.shape)
