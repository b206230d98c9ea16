"""HTTP sidecar serving sentence embeddings.

Wire contract: POST /embed with {"texts": [str]} returns {"vectors":
[[float]]}; GET /health returns {"dim": d}. The extraction engine's remote
backend consumes exactly this surface.
"""

from .app import ServerConfig, create_app
from .encoders import HashEncoder, SbertEncoder, make_encoder

__all__ = ["ServerConfig", "create_app", "HashEncoder", "SbertEncoder",
           "make_encoder"]
__version__ = "0.1.0"
