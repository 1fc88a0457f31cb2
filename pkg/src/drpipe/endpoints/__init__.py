from .client import ClientRunSpec, run_client
from .server import DrServer, ServerConfig, serve

__all__ = ["ClientRunSpec", "run_client", "DrServer", "ServerConfig", "serve"]
