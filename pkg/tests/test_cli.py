import json
from pathlib import Path

import pytest

from ftsbands.cli import main, parse_kv_config
from ftsbands.market.books import parse_books_csv
from ftsbands.market.synth import SynthConfig, generate_books
from ftsbands.market.books import serialize_books_csv


def write_config(path: Path, **keys) -> str:
    text = "\n".join(f"{k} = {v}" for k, v in keys.items()) + "\n"
    path.write_text(text)
    return str(path)


class TestConfigParsing:
    def test_key_value_lines(self):
        cfg = parse_kv_config("a = 1\n# comment\nb=two\n\nc = 3 # trailing\n")
        assert cfg == {"a": "1", "b": "two", "c": "3"}

    def test_malformed_line_rejected(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_kv_config("a = 1\nnot a pair\n")

    def test_missing_config_file_exits_nonzero(self, capsys):
        code = main(["study", "--config", "/nonexistent/conf", "--out", "/tmp/x"])
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert "error" in err


class TestSimulate:
    def test_series_deterministic(self, tmp_path):
        conf = write_config(tmp_path / "c.conf", kind="series", T=12, seed=5)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["simulate", "--config", conf, "--out", str(out1)]) == 0
        assert main(["simulate", "--config", conf, "--out", str(out2)]) == 0
        assert (out1 / "series.txt").read_text() == (out2 / "series.txt").read_text()
        assert (out1 / "latent.csv").read_text() == (out2 / "latent.csv").read_text()
        meta = json.loads((out1 / "meta.json").read_text())
        assert meta["seed"] == 5 and len(meta["config_hash"]) == 64

    def test_seed_flag_overrides_config(self, tmp_path):
        conf = write_config(tmp_path / "c.conf", kind="series", T=12, seed=5)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["simulate", "--config", conf, "--out", str(out1), "--seed", "9"])
        main(["simulate", "--config", conf, "--out", str(out2)])
        assert (out1 / "series.txt").read_text() != (out2 / "series.txt").read_text()

    def test_books_output(self, tmp_path):
        conf = write_config(
            tmp_path / "c.conf", kind="books", n_days=5, seed=2, format="csv"
        )
        out = tmp_path / "books"
        assert main(["simulate", "--config", conf, "--out", str(out)]) == 0
        books = parse_books_csv((out / "books.csv").read_bytes())
        assert len(books) == 5


class TestStudy:
    def test_writes_csv_and_summary(self, tmp_path):
        conf = write_config(
            tmp_path / "c.conf", model="oracle", T=25, l=7, b=1, alpha=0.25, N=25, seed=3
        )
        out = tmp_path / "study"
        assert main(["study", "--config", conf, "--out", str(out)]) == 0
        lines = (out / "study.csv").read_text().strip().splitlines()
        assert lines[0].startswith("model,T,l,b,alpha,N,coverage")
        fields = lines[1].split(",")
        assert fields[0] == "oracle" and fields[1] == "25"
        summary = json.loads((out / "summary.json").read_text())
        assert 0.0 <= summary["coverage"] <= 1.0
        assert summary["config_hash"] == json.loads((out / "summary.json").read_text())["config_hash"]

    def test_invalid_study_config_exits_two(self, tmp_path, capsys):
        conf = write_config(tmp_path / "c.conf", model="oracle", T=25, l=7, b=3, N=5)
        assert main(["study", "--config", conf, "--out", str(tmp_path / "s")]) == 2
        assert "detail" in json.loads(capsys.readouterr().err)


@pytest.fixture(scope="module")
def book_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("books") / "books.csv"
    books = generate_books(SynthConfig(n_days=95, seed=17))
    path.write_text(serialize_books_csv(books))
    return path


class TestIngest:
    def test_normalizes_valid_books(self, tmp_path, book_csv):
        conf = write_config(tmp_path / "c.conf", **{"in": str(book_csv), "format": "csv"})
        out = tmp_path / "norm"
        assert main(["ingest", "--config", conf, "--out", str(out)]) == 0
        books = parse_books_csv((out / "books.csv").read_bytes())
        assert len(books) == 95

    def test_malformed_xml_reports_element_path(self, tmp_path, capsys):
        bad = tmp_path / "bad.xml"
        bad.write_text('<auction day="2020-01-01"><order side="offer" qty="5"/></auction>')
        conf = write_config(tmp_path / "c.conf", **{"in": str(bad), "format": "xml"})
        assert main(["ingest", "--config", conf, "--out", str(tmp_path / "o")]) == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "parse_error"
        assert "auction/order[1]" in err["detail"]


class TestBacktestAndPrecompute:
    def test_backtest_report(self, tmp_path, book_csv):
        conf = write_config(tmp_path / "c.conf", books=str(book_csv), format="csv")
        out = tmp_path / "bt"
        assert main(["backtest", "--config", conf, "--out", str(out)]) == 0
        report = (out / "report.csv").read_text()
        assert report.startswith("date,k,band_size_offer")
        summary = json.loads((out / "summary.json").read_text())
        assert summary["n_days"] == 5
        assert summary["region_containment"] >= summary["band_containment"] - 1e-12

    def test_precompute_artifacts_loadable(self, tmp_path, book_csv):
        conf = write_config(
            tmp_path / "c.conf", books=str(book_csv), format="csv", alphas="0.25,0.5"
        )
        out = tmp_path / "art"
        assert main(["precompute", "--config", conf, "--out", str(out)]) == 0
        files = sorted(out.glob("band_*.json"))
        assert len(files) == 10  # 5 target days x 2 alphas
        from ftsbands.server import ArtifactStore

        store = ArtifactStore(out)
        assert len(store.days) == 5
        assert store.alphas == ["0.25", "0.5"]
