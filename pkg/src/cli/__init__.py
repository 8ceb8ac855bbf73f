from .main import build_parser, main
from .manifest import ResultCache, RunManifest, canonical_json, config_hash

__all__ = [
	"main",
	"build_parser",
	"RunManifest",
	"ResultCache",
	"canonical_json",
	"config_hash",
]
