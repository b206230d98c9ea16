"""Launcher: `embed-server --model hash --port 8500`."""

from __future__ import annotations

import argparse
import json
import sys

from .app import ServerConfig, create_app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Serve sentence embeddings over HTTP "
                    "(POST /embed, GET /health).")
    parser.add_argument("--model", default="hash",
                        help='"hash", "hash:<dim>", or a '
                             "sentence-transformers checkpoint id")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8500)
    parser.add_argument("--max-batch", type=int, default=64)
    args = parser.parse_args(argv)

    config = ServerConfig(model_id=args.model, port=args.port,
                          max_batch=args.max_batch)
    app = create_app(config)
    # startup manifest: which model this process serves, and at what dim
    print(json.dumps({"model": config.model_id,
                      "dim": app.state.encoder.dim,
                      "max_batch": config.max_batch,
                      "port": config.port}), flush=True)

    import uvicorn
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
