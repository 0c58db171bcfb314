from __future__ import annotations

import shutil

import pytest
from click.testing import CliRunner

from malont_kg.cli import main
from malont_kg.nquads import import_nquads
from malont_kg.ontology import builtin_malont, reify, to_dsl
from malont_kg.pipeline import build
from malont_kg.query import evaluate, parse_query, serialize_results
from malont_kg.terms import INFERRED_GRAPH

from conftest import FIXTURE_A, QUERIES, competency_query


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def built(tmp_path, runner):
    out = tmp_path / "kg.nq"
    result = runner.invoke(main, ["kg", "build", "--corpus", str(FIXTURE_A), "-o", str(out)])
    assert result.exit_code == 0, result.output
    return out


def test_ontology_check_builtin(runner):
    result = runner.invoke(main, ["ontology", "check", "--builtin"])
    assert result.exit_code == 0
    assert result.output == "ok: 29 classes, 11 object properties, 3 datatype properties\n"


def test_ontology_check_file(runner, tmp_path):
    good = tmp_path / "good.mos"
    good.write_text(to_dsl(builtin_malont()))
    assert runner.invoke(main, ["ontology", "check", str(good)]).exit_code == 0
    cyclic = tmp_path / "cyclic.mos"
    cyclic.write_text("class A : B\nclass B : A\n")
    result = runner.invoke(main, ["ontology", "check", str(cyclic)])
    assert result.exit_code == 1 and "cyclic-hierarchy(A,B)" in result.output
    assert runner.invoke(main, ["ontology", "check", str(tmp_path / "missing.mos")]).exit_code == 2
    assert runner.invoke(main, ["ontology", "check"]).exit_code == 2


def test_build_outputs(built, ontology):
    quads = import_nquads(built.read_text())
    store, summary = build(ontology, FIXTURE_A)
    assert set(quads) == set(store)
    assert set(reify(ontology)) <= set(quads)
    prov = built.with_name("kg.prov.tsv").read_text().splitlines()
    assert prov[0].startswith("quad-key\t")
    assert len(prov) - 1 == sum(len(store.provenance(q)) for q in store)


def test_build_summary_matches_stats(runner, tmp_path, ontology):
    out = tmp_path / "kg.nq"
    result = runner.invoke(main, ["kg", "build", "--corpus", str(FIXTURE_A), "-o", str(out)])
    summary = dict(line.split("\t") for line in result.stderr.splitlines() if "\t" in line)
    stats = runner.invoke(main, ["kg", "stats", "--kg", str(out)]).output
    quads = int(stats.splitlines()[0].split("\t")[1])
    assert int(summary["asserted-quads"]) + int(summary["inferred-quads"]) + 136 == quads
    assert summary["docs"] == "2" and summary["failed-docs"] == "0"


def test_build_without_materialize(runner, tmp_path):
    out = tmp_path / "kg.nq"
    result = runner.invoke(main, ["kg", "build", "--corpus", str(FIXTURE_A), "--no-materialize", "-o", str(out)])
    assert result.exit_code == 0
    assert all(q.graph != INFERRED_GRAPH for q in import_nquads(out.read_text()))


def test_build_with_bad_document(runner, tmp_path):
    corpus = tmp_path / "corpus"
    shutil.copytree(FIXTURE_A, corpus)
    (corpus / "broken.ann").write_text("T1\tSoftware x y\tPowerPoint\n")
    out = tmp_path / "kg.nq"
    result = runner.invoke(main, ["kg", "build", "--corpus", str(corpus), "-o", str(out)])
    assert result.exit_code == 1
    assert "broken" in result.stderr
    assert "Campaign--zerot-plugx" in out.read_text()


def test_build_with_mapping(runner, tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "r.txt").write_text("The PowerPoint file installs malicious code")
    (corpus / "r.ann").write_text("T1\tSW 4 19\tPowerPoint file\nT2\tVULN 20 43\tinstalls malicious code\nR1\tvuln Arg1:T1 Arg2:T2\n")
    mapping = tmp_path / "m.map"
    mapping.write_text("entity SW -> Software\nentity VULN -> Vulnerability\nrelation vuln -> hasVulnerability\n")
    out = tmp_path / "kg.nq"
    result = runner.invoke(main, ["kg", "build", "--corpus", str(corpus), "--mapping", str(mapping), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert "<https://malont.example/ontology#hasVulnerability>" in out.read_text()
    mapping.write_text("entity SW -> Gadget\n")
    assert runner.invoke(main, ["kg", "build", "--corpus", str(corpus), "--mapping", str(mapping), "-o", str(out)]).exit_code == 1


def test_build_missing_corpus(runner, tmp_path):
    assert runner.invoke(main, ["kg", "build", "--corpus", str(tmp_path / "none"), "-o", str(tmp_path / "o.nq")]).exit_code == 2


def test_query_matches_in_process(runner, built, ontology):
    store, _ = build(ontology, FIXTURE_A)
    for n in (1, 2, 3):
        result = runner.invoke(main, ["kg", "query", "--kg", str(built), "--query", str(QUERIES / f"cq{n}.rq")])
        assert result.exit_code == 0
        assert result.stdout == serialize_results(evaluate(store, parse_query(competency_query(n))))


def test_query_errors(runner, built, tmp_path):
    bad = tmp_path / "bad.rq"
    bad.write_text("SELECT ?x WHERE { ?x a owl:Class . FILTER(?x) }")
    result = runner.invoke(main, ["kg", "query", "--kg", str(built), "--query", str(bad)])
    assert result.exit_code == 1 and "FILTER" in result.stderr
    empty = tmp_path / "empty.rq"
    empty.write_text("SELECT ?x WHERE { ?x a malont:Nothing }")
    result = runner.invoke(main, ["kg", "query", "--kg", str(built), "--query", str(empty)])
    assert (result.exit_code, result.stdout) == (0, "?x\n")
    assert runner.invoke(main, ["kg", "query", "--kg", str(built), "--query", str(tmp_path / "no.rq")]).exit_code == 2


def test_validate(runner, built, tmp_path):
    assert runner.invoke(main, ["kg", "validate", "--kg", str(built)]).exit_code == 0
    bad = tmp_path / "bad.nq"
    bad.write_text(
        built.read_text()
        + "<https://malont.example/kg#Location--russia> <https://malont.example/ontology#hasFamily> "
        "<https://malont.example/kg#MalwareFamily--plugx-family> <https://malont.example/kg#graph--doc--x> .\n"
    )
    result = runner.invoke(main, ["kg", "validate", "--kg", str(bad)])
    assert result.exit_code == 1 and result.output.startswith("domain\t")
    schema_only = tmp_path / "schema.nq"
    schema_only.write_text("".join(line + "\n" for line in built.read_text().splitlines() if line.endswith("graph--schema> .")))
    assert runner.invoke(main, ["kg", "validate", "--kg", str(schema_only)]).exit_code == 0
    assert runner.invoke(main, ["kg", "validate", "--kg", str(tmp_path / "nope.nq")]).exit_code == 2


def test_export(runner, built, tmp_path):
    first = runner.invoke(main, ["kg", "export", "--kg", str(built)]).stdout
    assert first == built.read_text()
    shuffled = tmp_path / "shuffled.nq"
    shuffled.write_text("# hand edited\n" + "\n".join(reversed(built.read_text().splitlines())) + "\n")
    out = tmp_path / "again.nq"
    assert runner.invoke(main, ["kg", "export", "--kg", str(shuffled), "-o", str(out), "--prov"]).exit_code == 0
    assert out.read_text() == first
    assert (tmp_path / "again.prov.tsv").exists()
    assert runner.invoke(main, ["kg", "export", "--kg", str(built), "--prov"]).exit_code == 2


def test_stats(runner, built, tmp_path):
    lines = runner.invoke(main, ["kg", "stats", "--kg", str(built)]).output.splitlines()
    assert "classes\t29" in lines and "instances\t15" in lines
    empty = tmp_path / "empty.nq"
    empty.write_text("")
    result = runner.invoke(main, ["kg", "stats", "--kg", str(empty)])
    assert result.exit_code == 0
    assert all(line.endswith("\t0") for line in result.output.splitlines())


def test_malformed_kg_file(runner, tmp_path):
    bad = tmp_path / "bad.nq"
    bad.write_text("<s> <p> <o>\n")
    result = runner.invoke(main, ["kg", "stats", "--kg", str(bad)])
    assert result.exit_code == 1 and "line 1" in result.stderr
