import random

import pytest

from sortlab.bench import CSV_HEADER, TECHNIQUES, MetricsMatrix, MetricsRecord, read_metrics_csv, write_metrics_csv
from sortlab.errors import FormatError


def random_matrix(rng: random.Random) -> MetricsMatrix:
    t = rng.choice(TECHNIQUES)
    rows = [
        MetricsRecord(
            t,
            rng.randrange(0, 10**7),
            rng.randrange(0, 2**64),
            rng.randrange(0, 10**12),
            rng.randrange(0, 10**10),
            rng.randrange(0, 10**7),
        )
        for _ in range(rng.randrange(0, 30))
    ]
    return MetricsMatrix(rows)


def test_empty_round_trip(tmp_path):
    p = tmp_path / "m.csv"
    write_metrics_csv(MetricsMatrix([]), p)
    assert p.read_text() == ",".join(CSV_HEADER) + "\n"
    assert read_metrics_csv(p).rows == []


def test_single_row_round_trip(tmp_path):
    p = tmp_path / "m.csv"
    m = MetricsMatrix([MetricsRecord("treap", 1000, 2**64 - 1, 123456, 64000, 63)])
    write_metrics_csv(m, p)
    assert read_metrics_csv(p) == m
    assert b"\r" not in p.read_bytes()


def test_random_round_trips(tmp_path):
    rng = random.Random(8)
    for i in range(20):
        m = random_matrix(rng)
        p = tmp_path / f"m{i}.csv"
        write_metrics_csv(m, p)
        assert read_metrics_csv(p) == m


def _write(tmp_path, body):
    p = tmp_path / "bad.csv"
    p.write_text(",".join(CSV_HEADER) + "\n" + body, encoding="utf-8")
    return p


@pytest.mark.parametrize(
    "body, line",
    [
        ("heap,10,1,abc,80,1\n", 2),
        ("heap,10,1,5,80,1\nheap,10,1,5,80\n", 3),
        ("heap,10,1,5,80,1\nheap,10,1,5,80,1\nbogus,1,1,1,1,1\n", 4),
        ("heap,10,1,-5,80,1\n", 2),
    ],
)
def test_malformed_rows_name_the_line(tmp_path, body, line):
    with pytest.raises(FormatError) as exc:
        read_metrics_csv(_write(tmp_path, body))
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_bad_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b,c\n")
    with pytest.raises(FormatError) as exc:
        read_metrics_csv(p)
    assert exc.value.line == 1


def test_mixed_techniques_rejected(tmp_path):
    with pytest.raises(FormatError):
        read_metrics_csv(_write(tmp_path, "heap,1,1,1,1,1\nshell,1,1,1,1,1\n"))


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_metrics_csv(tmp_path / "nope.csv")
