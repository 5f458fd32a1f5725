import csv
import io
import json
import pytest
import sys
from pydantic import ValidationError
from app import build_parser, load_config, main
from cli import commands
from cli.config import RunConfig
from cli.writers import COLUMNS, PROVENANCE, RowWriter
from config.settings import Settings
from core.graph import Graph, Interval
from utils.file_utils import FileUtils

SCHEDULE_FLAGS = ['--alpha', '1.2', '--gamma', '0.75', '--c-values', '16,16,16', '--m1', '4', '--epsilon', '0.1']
BETAC_FLAGS = ['--side', 'one', '--sizes', '16,32,64', '--betas', '0.1,4,16', '--replicas', '20',
               '--seed', '3', '--threads', '1']


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.DictReader(f))


def test_schedule_table(tmp_path):
    out = tmp_path / "schedule.csv"
    assert main(['schedule', *SCHEDULE_FLAGS, '--out', str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0].keys()) == COLUMNS['schedule'] + PROVENANCE
    assert [int(r['M_n']) for r in rows] == [4, 64, 1024]
    assert [float(r['d_n']) for r in rows] == [0.5, 0.5, 0.5]
    # eps_1 = 0.1 / (1 + 3 * 0.5)^3
    assert [float(r['eps_n']) for r in rows] == pytest.approx([0.0064, 0.016, 0.04])
    assert float(rows[0]['eps_1']) == pytest.approx(0.0064)
    assert {r['seed'] for r in rows} == {'0'}
    assert len(rows[0]['config_hash']) == 16
    assert not FileUtils.partial_path(out).exists()


def test_jsonl_has_the_csv_columns(tmp_path):
    out = tmp_path / "schedule.jsonl"
    assert main(['schedule', *SCHEDULE_FLAGS, '--format', 'jsonl', '--out', str(out)]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert len(records) == 3
    assert list(records[0].keys()) == COLUMNS['schedule'] + PROVENANCE
    assert records[2]['M_n'] == 1024


def test_config_file_is_overridden_by_flags(tmp_path):
    config_file = tmp_path / "run.cfg"
    config_file.write_text("# desk-scale schedule\nalpha=1.2\ngamma=0.75\nc_values=16,16,16\nm1=4\nepsilon=0.5\n")
    args = build_parser().parse_args(['schedule', '--config', str(config_file), '--epsilon', '0.1'])
    config = load_config(args)
    assert config.epsilon == 0.1
    assert config.c_values == [16, 16, 16]
    assert config.m1 == 4


def test_missing_config_file_exits_with_two(tmp_path):
    assert main(['schedule', '--config', str(tmp_path / "absent.cfg")]) == 2


@pytest.mark.parametrize("argv", [
    ['schedule', '--alpha', '0.9', '--gamma', '0.8'],
    ['schedule', '--gamma', '0.7'],
    ['betac', '--sizes', '16,32', '--betas', '0.1,1'],
    ['sample'],
    ['coarse', '--size', '64', '--gamma', '0.9'],
    ['lemma2', '--gamma', '0.9', '--q', '0.5', '--sizes', '8'],
    ['sample', '--size', '5', '--model', 'fk', '--q', '2', '--sweeps', '0'],
])
def test_invalid_configuration_exits_with_two(argv):
    assert main(argv) == 2


def test_domain_error_exits_with_two(tmp_path):
    out = tmp_path / "betac.csv"
    argv = ['betac', '--side', 'one', '--sizes', '16,32,64', '--betas', '0.001,0.002', '--replicas', '5',
            '--threads', '1', '--out', str(out)]
    assert main(argv) == 2
    assert not out.exists()
    assert not FileUtils.partial_path(out).exists()


def test_config_hash_ignores_outputs_only():
    base = RunConfig(command='schedule', gamma=0.75, alpha=1.2, c_values=[16, 16, 16])
    same = RunConfig(command='schedule', gamma=0.75, alpha=1.2, c_values=[16, 16, 16], threads=7, format='jsonl',
                     out='x.jsonl')
    other = RunConfig(command='schedule', gamma=0.75, alpha=1.2, c_values=[16, 16, 16], seed=1)
    assert base.config_hash() == same.config_hash()
    assert base.config_hash() != other.config_hash()


def test_sweeps_must_be_positive():
    with pytest.raises(ValidationError, match="sweeps >= 1"):
        RunConfig(command='sample', size=5, model='fk', q=2.0, sweeps=0)
    assert RunConfig(command='sample', size=5, model='fk', q=2.0).sweeps is None


def test_gamma_prime_defaults_to_midpoint():
    config = RunConfig(command='schedule', alpha=1.2, gamma=0.8)
    assert config.effective_gamma_prime == pytest.approx(0.7)


def test_sample_at_beta_zero_has_no_edges(tmp_path):
    out = tmp_path / "g.txt"
    assert main(['sample', '--size', '5', '--side', 'one', '--beta', '0', '--out', str(out)]) == 0
    assert out.read_text() == "vertices 0 5\n"


def test_sample_prints_to_stdout(capsys):
    assert main(['sample', '--size', '4', '--side', 'two', '--beta', '0']) == 0
    assert capsys.readouterr().out == "vertices -4 4\n"


@pytest.mark.parametrize("model", ['bernoulli', 'fk', 'site-bond', 'sprinkle'])
def test_sample_models_write_valid_graphs(tmp_path, model):
    out = tmp_path / f"{model}.txt"
    argv = ['sample', '--size', '12', '--side', 'one', '--q', '2', '--delta', '0.5', '--lambda', '0.5',
            '--sweeps', '20', '--model', model, '--out', str(out)]
    if model != 'fk':
        argv[argv.index('--q') + 1] = '1'
    assert main(argv) == 0
    g = FileUtils.read_graph(out)
    assert g.vertices == Interval(0, 12)


def test_clusters_of_a_graph_file(tmp_path):
    graph_file = tmp_path / "g.txt"
    FileUtils.write_graph(graph_file, Graph.from_pairs(Interval(0, 6), [(0, 2), (2, 5), (3, 4)]))
    out = tmp_path / "clusters.csv"
    assert main(['clusters', '--graph', str(graph_file), '--window', '0:3', '--out', str(out)]) == 0
    (row,) = read_csv(out)
    assert row['omega'] == '3'
    assert row['largest'] == '3'
    assert row['largest_induced'] == '2'
    assert row['window'] == '[0,3)'


def test_betac_is_byte_identical_across_runs(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(['betac', *BETAC_FLAGS, '--out', str(first)]) == 0
    assert main(['betac', *BETAC_FLAGS, '--out', str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = read_csv(first)
    kinds = [r['kind'] for r in rows]
    assert kinds.count('grid') == 9
    assert kinds.count('crossing') == 3
    assert kinds[-1] == 'estimate'
    estimate = rows[-1]
    assert float(estimate['ci_lo']) <= float(estimate['beta']) <= float(estimate['ci_hi'])


def test_lemma2_rows(tmp_path):
    out = tmp_path / "lemma2.csv"
    argv = ['lemma2', '--gamma', '0.8', '--beta', '0', '--sizes', '16,32', '--replicas', '4', '--threads', '1',
            '--out', str(out)]
    assert main(argv) == 0
    rows = read_csv(out)
    assert [r['N'] for r in rows] == ['16', '32']
    assert {r['rate'] for r in rows} == {'0.0'}


def test_coarse_rows_at_full_bond_density(tmp_path):
    out = tmp_path / "coarse.csv"
    argv = ['coarse', '--size', '64', '--block', '16', '--gamma', '0.8', '--beta', '20', '--delta', '1',
            '--out', str(out)]
    assert main(argv) == 0
    rows = read_csv(out)
    # four good blocks give six coarse pairs
    assert len(rows) == 6
    for row in rows:
        assert int(row['d_ij']) == (abs(int(row['block_i']) - int(row['block_j'])) + 1) * 16
        assert 0 <= float(row['p_lower_bound']) <= 1


def test_dominate_corpus_file(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("# W, V, q and the outside event\n"
                      "w=0:3 v=0:2 q=2 beta=1.0 alpha=1.5 condition=edge_open:0-2\n"
                      "w=0:4 v=1:3 q=1 beta=1.0 alpha=1.5 condition=all_closed\n")
    out = tmp_path / "dominate.csv"
    assert main(['dominate', '--corpus', str(corpus), '--threads', '1', '--out', str(out)]) == 0
    rows = read_csv(out)
    assert [r['dominated'] for r in rows] == ['true', 'true']
    assert rows[0]['condition'] == 'edge_open:0-2'


def test_dominate_adds_sprinkle_rows(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("w=0:3 v=0:2 q=1 beta=1.0 alpha=1.5\n")
    out = tmp_path / "dominate.csv"
    assert main(['dominate', '--corpus', str(corpus), '--delta', '0.5', '--threads', '1', '--out', str(out)]) == 0
    rows = read_csv(out)
    assert rows[-1]['condition'] == 'sprinkle:0.5'
    assert rows[-1]['dominated'] == 'true'


def test_failed_write_leaves_no_partial_file(tmp_path, monkeypatch):
    out = tmp_path / "broken.csv"
    monkeypatch.setitem(commands.HANDLERS, 'schedule', lambda config: [{'n': 1}, {'bogus': 2}])
    config = RunConfig(command='schedule', gamma=0.75, alpha=1.2, c_values=[16], out=out)
    assert commands.run(config) == 1
    assert not out.exists()
    assert not FileUtils.partial_path(out).exists()


def test_writer_rejects_unknown_columns():
    writer = RowWriter('schedule', 'csv', {'seed': 0, 'stream': 0, 'config_hash': 'x'})
    with pytest.raises(KeyError):
        writer._complete({'volume': 3})


def test_writer_keeps_row_provenance(capsys):
    writer = RowWriter('lemma2', 'jsonl', {'seed': 1, 'stream': 0, 'config_hash': 'abc'})
    writer.write([{'N': 8, 'rate': float('nan'), 'seed': 99}], None)
    record = json.loads(capsys.readouterr().out)
    assert record['seed'] == 99
    assert record['stream'] == 0
    assert record['rate'] is None


def test_bad_thread_setting_exits_with_two(monkeypatch):
    monkeypatch.setattr(Settings, 'THREADS', 0)
    assert main(['schedule', *SCHEDULE_FLAGS]) == 2


def test_induction_rows(tmp_path):
    out = tmp_path / "induction.csv"
    # 81^(-1/4) = 1/3 keeps d_n below 1/2
    argv = ['induction', '--alpha', '1.2', '--gamma', '0.75', '--c-values', '81,81', '--m1', '4', '--pad', '0',
            '--beta', '3', '--delta', '1', '--replicas', '5', '--threads', '1', '--out', str(out)]
    assert main(argv) == 0
    rows = read_csv(out)
    assert {(r['n'], r['M_prev'], r['c_n'], r['L']) for r in rows} == {('2', '4', '81', '0')}
    quantities = [r['quantity'] for r in rows]
    assert quantities[:3] == ['child_good_rate', 'k_mean', 'p_k_large']
    assert 'p_big_cluster' in quantities


def test_runs_survive_a_closed_stderr_from_an_earlier_run(tmp_path, monkeypatch):
    stale = io.StringIO()
    with monkeypatch.context() as m:
        m.setattr(sys, 'stderr', stale)
        assert main(['sample', '--size', '4', '--side', 'one', '--beta', '0', '--out', str(tmp_path / "a.txt")]) == 0
    stale.close()
    assert main(['sample', '--size', '4', '--side', 'one', '--beta', '0', '--out', str(tmp_path / "b.txt")]) == 0
    assert main(['schedule', '--gamma', '0.7']) == 2


def test_logs_go_to_stderr_not_stdout(capsys):
    assert main(['schedule', '--gamma', '0.7']) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert " - dyson_rc - ERROR - " in captured.err
