"""Inventory loading, membership and idempotence."""

import time

from synthsearch.inventory import Inventory, load


def test_load_normalization_collapse(tmp_path):
    path = tmp_path / "inv.smi"
    path.write_text("CCO\n[CH3:1]O\nCO\n")
    inv = load(path)
    # [CH3:1]O normalizes to CO[CH3]... no: single component "[CH3]O"
    assert inv.count == 3
    assert inv.contains("CCO")
    assert inv.contains("[CH3]O")


def test_load_collapses_duplicates(tmp_path):
    path = tmp_path / "inv.smi"
    path.write_text("CC.CO\nCO.CC\n")
    inv = load(path)
    assert inv.count == 1


def test_load_empty_file(tmp_path):
    path = tmp_path / "inv.smi"
    path.write_text("")
    assert load(path).count == 0


def test_load_skips_malformed_with_count(tmp_path):
    path = tmp_path / "inv.smi"
    path.write_text("CCO\nC(C\nCO\n")
    inv = load(path)
    assert inv.count == 2
    assert inv.skipped == 1


def test_contains_raw_vs_normalized_query(tmp_path):
    inv = Inventory.from_smiles(["[CH3:5]O"])
    from synthsearch.smiles import normalize

    raw_answer = inv.contains(normalize("[CH3:9]O"))
    pre_answer = inv.contains("[CH3]O")
    assert raw_answer == pre_answer is True
    assert not inv.contains("CCO")


def test_dump_reload_idempotent(tmp_path):
    inv = Inventory.from_smiles(["CO.CC", "CCO", "[NH2:3]C"])
    dump = tmp_path / "dump.smi"
    inv.dump(dump)
    again = load(dump)
    assert again.members == inv.members
    assert again.source_digest == inv.source_digest


def test_gzip_roundtrip(tmp_path):
    import gzip

    path = tmp_path / "inv.smi.gz"
    with gzip.open(path, "wt") as fh:
        fh.write("CCO\nCC\n")
    assert load(path).count == 2


def test_membership_throughput():
    # Engineering target: >= 1e6 membership queries per second at 1e6 members.
    members = [f"C{i:07d}"[:1] + format(i, "07b").replace("0", "C").replace("1", "N") for i in range(1_000_000)]
    inv = Inventory(members=frozenset(members), source_digest="x")
    queries = members[::100] * 50  # 500k hits
    queries += [q + "O" for q in members[::200] * 25]  # misses
    start = time.perf_counter()
    hits = 0
    contains = inv.members.__contains__
    for q in queries:
        if contains(q):
            hits += 1
    elapsed = time.perf_counter() - start
    assert hits == 500_000
    assert len(queries) / elapsed > 1_000_000, f"only {len(queries)/elapsed:.0f} q/s"
