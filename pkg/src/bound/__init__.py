from .integrand import dq_dx, integrand_q, t1, t2, x_star, x_tilde
from .lower_bound import SEL_THRESHOLD, GainLoss, evaluate_bound, gain_loss, lower_bound, u_star_star
from .minimizer import g_tilde, g_tilde_for_width, minimize_on_nodes, minimize_q, s_of_prior
from .prior import BoundResult, PriorPair

__all__ = [
	"PriorPair",
	"BoundResult",
	"integrand_q",
	"dq_dx",
	"t1",
	"t2",
	"x_star",
	"x_tilde",
	"minimize_on_nodes",
	"minimize_q",
	"s_of_prior",
	"g_tilde",
	"g_tilde_for_width",
	"lower_bound",
	"u_star_star",
	"gain_loss",
	"GainLoss",
	"evaluate_bound",
	"SEL_THRESHOLD",
]
