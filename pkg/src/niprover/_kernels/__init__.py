"""Term-manipulation kernels with a compiled fast path.

The Cython extension is optional: the pure-Python twin implements the same
interface and is selected when the extension is missing or when the
``NIPROVER_PURE_PYTHON`` environment variable is set (useful for parity
testing and benchmarking).
"""

import os

from . import term_ops_py

if os.environ.get("NIPROVER_PURE_PYTHON"):
    _impl = term_ops_py
    BACKEND = "python"
else:
    try:
        from . import _term_ops_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = term_ops_py
        BACKEND = "python"

walk = _impl.walk
occurs = _impl.occurs
unify_terms = _impl.unify_terms
unify_args = _impl.unify_args
apply_subst = _impl.apply_subst
resolve_subst = _impl.resolve_subst
shift_vars = _impl.shift_vars
canonicalize_args = _impl.canonicalize_args
max_var = _impl.max_var
term_size = _impl.term_size
term_depth = _impl.term_depth
serialize_term = _impl.serialize_term
