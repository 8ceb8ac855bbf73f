from .prior_search import (
	PriorEncoding,
	escalate,
	optimize_prior,
	pad_prior,
	solve_u_star_star,
	starting_priors,
)

__all__ = [
	"PriorEncoding",
	"optimize_prior",
	"escalate",
	"solve_u_star_star",
	"pad_prior",
	"starting_priors",
]
