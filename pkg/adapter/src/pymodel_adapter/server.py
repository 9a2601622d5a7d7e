"""JSON-lines model server over stdio or TCP.

Protocol: one request per line
``{"id": <int>, "smiles": <string>, "num_results": <int>}``; one response per
line ``{"id": <int>, "predictions": [{"reactants": [...], "probability":
<float>}, ...]}``.  A malformed request yields ``{"id": ..., "error": ...}``
and the loop continues; only transport closure ends the server.

Table file: TSV ``product<TAB>reactants(dot-joined)<TAB>probability``, one
prediction per line, grouped by product; rank is file order.  Lookup is by
exact product string, as emitted by the client (normalized ids).
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
from typing import IO

AdapterTable = dict[str, list[dict]]


def load_table(path: str) -> AdapterTable:
    table: AdapterTable = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{line_no}: expected 3 tab-separated fields")
            product, reactants, probability = parts
            p = float(probability)
            if not 0.0 < p <= 1.0:
                raise ValueError(f"{path}:{line_no}: probability {p} outside (0, 1]")
            table.setdefault(product, []).append(
                {"reactants": reactants.split("."), "probability": p}
            )
    return table


def handle_line(line: str, table: AdapterTable) -> str:
    """One request in, exactly one response line out (id echoed)."""
    request_id = None
    try:
        request = json.loads(line)
        request_id = request.get("id") if isinstance(request, dict) else None
        smiles = request["smiles"]
        num_results = int(request["num_results"])
        if not isinstance(smiles, str) or num_results < 0:
            raise ValueError("bad field types")
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        return json.dumps({"id": request_id, "error": f"malformed request: {exc}"})
    predictions = table.get(smiles, [])[:num_results]
    return json.dumps({"id": request_id, "predictions": predictions})


def serve_stream(reader: IO[str], writer: IO[str], table: AdapterTable) -> None:
    for line in reader:
        if not line.strip():
            continue
        writer.write(handle_line(line, table) + "\n")
        writer.flush()


def serve_stdio(table: AdapterTable) -> None:
    serve_stream(sys.stdin, sys.stdout, table)


def serve_tcp(table: AdapterTable, host: str, port: int) -> None:
    """Accept one client at a time; serve each until it disconnects."""
    with socket.create_server((host, port)) as server:
        sys.stderr.write(f"listening on {host}:{server.getsockname()[1]}\n")
        sys.stderr.flush()
        while True:
            conn, _addr = server.accept()
            with conn, conn.makefile("r") as reader, conn.makefile("w") as writer:
                serve_stream(reader, writer, table)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="pymodel-adapter",
        description="Serve a TSV reaction table over the model wire protocol",
    )
    parser.add_argument("--table", required=True, help="TSV lookup table")
    parser.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0)
    args = parser.parse_args(argv)
    table = load_table(args.table)
    if args.transport == "stdio":
        serve_stdio(table)
    else:
        serve_tcp(table, args.host, args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
