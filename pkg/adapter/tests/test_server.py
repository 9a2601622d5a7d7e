"""Adapter protocol tests, driven through real transports."""

import json
import socket
import subprocess
import sys

import pytest

from pymodel_adapter.server import handle_line, load_table

TABLE_TSV = "CCO\tCC.O\t0.7\nCCO\tC.CO\t0.3\nCC\tC.C\t0.9\n"


@pytest.fixture
def table_path(tmp_path):
    path = tmp_path / "table.tsv"
    path.write_text(TABLE_TSV)
    return path


def test_load_table_ranks_by_file_order(table_path):
    table = load_table(str(table_path))
    assert [p["probability"] for p in table["CCO"]] == [0.7, 0.3]
    assert table["CC"][0]["reactants"] == ["C", "C"]


def test_load_table_rejects_bad_probability(tmp_path):
    path = tmp_path / "bad.tsv"
    path.write_text("CC\tC.C\t1.5\n")
    with pytest.raises(ValueError):
        load_table(str(path))


def test_handle_line_known_product(table_path):
    table = load_table(str(table_path))
    response = json.loads(handle_line('{"id": 3, "smiles": "CCO", "num_results": 1}', table))
    assert response == {
        "id": 3,
        "predictions": [{"reactants": ["CC", "O"], "probability": 0.7}],
    }


def test_handle_line_unknown_product(table_path):
    table = load_table(str(table_path))
    response = json.loads(handle_line('{"id": 9, "smiles": "NNN", "num_results": 5}', table))
    assert response == {"id": 9, "predictions": []}


@pytest.mark.parametrize(
    "bad",
    [
        "not json",
        '{"id": 1, "smiles": "CC"}',
        '{"id": 1, "num_results": 2}',
        '{"id": 1, "smiles": "CC", "num_results": "many"}',
    ],
)
def test_handle_line_malformed_request(table_path, bad):
    table = load_table(str(table_path))
    response = json.loads(handle_line(bad, table))
    assert "error" in response


def _spawn_stdio(table_path):
    return subprocess.Popen(
        [sys.executable, "-m", "pymodel_adapter", "--table", str(table_path)],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )


def test_stdio_loop_continues_after_error(table_path):
    proc = _spawn_stdio(table_path)
    try:
        requests = [
            '{"id": 1, "smiles": "CCO", "num_results": 2}',
            "garbage",
            '{"id": 2, "smiles": "CC", "num_results": 1}',
        ]
        for r in requests:
            proc.stdin.write(r + "\n")
        proc.stdin.flush()
        first = json.loads(proc.stdout.readline())
        second = json.loads(proc.stdout.readline())
        third = json.loads(proc.stdout.readline())
        assert first["id"] == 1 and len(first["predictions"]) == 2
        assert "error" in second
        assert third["id"] == 2 and third["predictions"][0]["reactants"] == ["C", "C"]
    finally:
        proc.stdin.close()
        assert proc.wait(timeout=5) == 0  # clean exit on transport closure


def test_stdio_one_response_per_request_in_order(table_path):
    proc = _spawn_stdio(table_path)
    try:
        ids = list(range(1, 21))
        for i in ids:
            proc.stdin.write(json.dumps({"id": i, "smiles": "CCO", "num_results": 1}) + "\n")
        proc.stdin.flush()
        got = [json.loads(proc.stdout.readline())["id"] for _ in ids]
        assert got == ids
    finally:
        proc.stdin.close()
        proc.wait(timeout=5)


def test_tcp_transport(table_path):
    proc = subprocess.Popen(
        [
            sys.executable, "-m", "pymodel_adapter",
            "--table", str(table_path), "--transport", "tcp", "--port", "0",
        ],
        stderr=subprocess.PIPE,
        text=True,
    )
    try:
        banner = proc.stderr.readline()  # "listening on host:port"
        port = int(banner.rsplit(":", 1)[1])
        with socket.create_connection(("127.0.0.1", port), timeout=5) as sock:
            sock.sendall(b'{"id": 5, "smiles": "CC", "num_results": 3}\n')
            response = json.loads(sock.makefile("r").readline())
        assert response["id"] == 5
        assert response["predictions"] == [{"reactants": ["C", "C"], "probability": 0.9}]
    finally:
        proc.terminate()
        proc.wait(timeout=5)
