from .functionals import (
	ConstraintReport,
	R1,
	R2,
	RiskCurve,
	check_constraints,
	coverage,
	default_gamma_grid,
	ell,
	ell_dag,
	risk_curve,
	sel,
	summarize_curve,
)
from .width import Width, WidthFunction, sd_delta_profile, sd_delta_width

__all__ = [
	"Width",
	"WidthFunction",
	"sd_delta_profile",
	"sd_delta_width",
	"ell",
	"ell_dag",
	"R1",
	"R2",
	"coverage",
	"sel",
	"RiskCurve",
	"risk_curve",
	"summarize_curve",
	"default_gamma_grid",
	"ConstraintReport",
	"check_constraints",
]
