"""Measure-valued valuations on convex functions built from primitive constant forms."""
from .forms import ConstantForm, FormMonomial, gl_pullback, is_primitive, lefschetz_project, primitive_basis, primitive_dimension, symplectic_form
from .minors import NOT_IN_SPAN, express_in_minors, form_from_minors, form_from_q, hessian_form, p_eval, p_of_form, q_eval, q_of_form
from .poly import MultiPoly

__version__ = "0.1.0"
