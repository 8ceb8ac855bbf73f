from .quadrature import GaussLegendreRule, gauss_legendre_rule, integrate
from .roots import bisect_vectorised

__all__ = [
	"GaussLegendreRule",
	"gauss_legendre_rule",
	"integrate",
	"bisect_vectorised",
]
