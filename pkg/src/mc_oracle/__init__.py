from .simulate import McEstimate, mc_coverage, mc_sel

__all__ = [
	"McEstimate",
	"mc_coverage",
	"mc_sel",
]
