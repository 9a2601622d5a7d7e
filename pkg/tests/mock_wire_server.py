"""Minimal JSON-lines model server used by the wire-client tests.

Serves a fixed table over stdio (default) or TCP (``tcp`` mode, prints the
chosen port on stderr); misbehavior flags exercise the client's error paths.
Independent of the synthsearch package on purpose.
"""

import json
import socket
import sys

TABLE = {
    "CCO": [
        {"reactants": ["CC", "O"], "probability": 0.7},
        {"reactants": ["C", "CO"], "probability": 0.3},
    ],
    "CC": [{"reactants": ["C", "C"], "probability": 0.9}],
}


def serve_tcp() -> None:
    with socket.create_server(("127.0.0.1", 0)) as server:
        sys.stderr.write(f"port {server.getsockname()[1]}\n")
        sys.stderr.flush()
        conn, _ = server.accept()
        with conn, conn.makefile("r") as reader, conn.makefile("w") as writer:
            for line in reader:
                request = json.loads(line)
                predictions = TABLE.get(request["smiles"], [])[: request["num_results"]]
                writer.write(json.dumps({"id": request["id"], "predictions": predictions}) + "\n")
                writer.flush()


def main() -> None:
    mode = sys.argv[1] if len(sys.argv) > 1 else "ok"
    if mode == "tcp":
        serve_tcp()
        return
    served = 0
    for line in sys.stdin:
        request = json.loads(line)
        served += 1
        if mode == "garbage":
            sys.stdout.write("not json at all\n")
        elif mode == "missing-key":
            sys.stdout.write(json.dumps({"id": request["id"]}) + "\n")
        elif mode == "wrong-id":
            sys.stdout.write(json.dumps({"id": -1, "predictions": []}) + "\n")
        elif mode == "error-response":
            sys.stdout.write(json.dumps({"id": request["id"], "error": "boom"}) + "\n")
        else:
            predictions = TABLE.get(request["smiles"], [])[: request["num_results"]]
            sys.stdout.write(
                json.dumps({"id": request["id"], "predictions": predictions}) + "\n"
            )
        sys.stdout.flush()
        if mode == "die-after-one" and served >= 1:
            return


if __name__ == "__main__":
    main()
