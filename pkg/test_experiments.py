#!/usr/bin/env python3
"""
Tests for experiment configuration, the experiment runner and both CLIs
"""

import json

import jsonlines
import numpy as np
import pandas as pd
import pytest

from riskagg.cli.riskagg_report import main as report_main
from riskagg.cli.riskagg_run import main
from riskagg.errors import ConfigError, DomainError
from riskagg.metrics import StabilityMetrics
from riskagg.runner import (
    ExperimentConfig,
    ExperimentKind,
    ExperimentRunner,
    MethodKind,
    load_config,
    load_returns,
    preset,
    synthetic_market,
)
from riskagg.runner.experiment_runner import EFFSIZE_COLUMNS, PROB_CURVE_COLUMNS

STABILITY_ARGS = ['stability', '--d', '3', '--beta', '0.95', '--sizes', '20,40', '--reps', '3',
                  '--survivor-samples', '2000', '--seed', '1',
                  '--methods', 'sampling,agg_monotonic,agg_cone,agg_reduction']


def read_json(path):
    with open(path) as f:
        return json.load(f)


def without_workers(summary):
    summary = dict(summary)
    summary['config'] = {k: v for k, v in summary['config'].items() if k != 'workers'}
    return summary


class TestExperimentConfig:

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_mapping({'beta': 0.9, 'colour': 'red'})

    def test_beta_fills_betas(self):
        cfg = ExperimentConfig().updated(beta=0.9)
        assert cfg.betas == [0.9]
        cfg = ExperimentConfig().updated(betas=[0.95, 0.99])
        assert cfg.beta == 0.95

    def test_enum_conversion(self):
        cfg = ExperimentConfig.from_mapping({'experiment': 'prob-curves', 'methods': ['agg_cone'], 'beta': 0.9})
        assert cfg.experiment is ExperimentKind.PROB_CURVES
        assert cfg.methods == [MethodKind.AGG_CONE]
        with pytest.raises(ConfigError):
            ExperimentConfig().updated(methods=['bootstrap'])

    def test_target_minus_infinity(self):
        cfg = ExperimentConfig().updated(t='-inf', beta=0.9).validate()
        assert cfg.target_return is None
        assert cfg.to_json_dict()['t'] == '-inf'

    @pytest.mark.parametrize("overrides", [
        {},
        {'beta': 1.0},
        {'beta': 0.9, 'scenario_sizes': [100, 50]},
        {'beta': 0.9, 'n_replications': 1},
        {'beta': 0.9, 'regions': ['sphere']},
        {'beta': 0.9, 'rho': 1.0},
        {'beta': 0.9, 'workers': 0},
        {'beta': 0.9, 'log_level': 'LOUD'},
        {'beta': 0.9, 'returns_path': '/nonexistent/returns.csv'},
    ])
    def test_validate_rejects(self, overrides):
        with pytest.raises(ConfigError):
            ExperimentConfig().updated(**overrides).validate()

    def test_presets(self):
        cfg = preset('d10_beta99')
        assert cfg.d == 10 and cfg.betas == [0.99]
        with pytest.raises(ConfigError):
            preset('d3_beta50')

    def test_load_yaml_and_json(self, tmp_path):
        yaml_path = tmp_path / 'cfg.yaml'
        yaml_path.write_text("experiment: gen\nbeta: 0.9\nd: 3\nn_risk: 12\n")
        cfg = load_config(yaml_path)
        assert cfg.experiment is ExperimentKind.GENERATE
        assert (cfg.d, cfg.n_risk, cfg.betas) == (3, 12, [0.9])

        json_path = tmp_path / 'cfg.json'
        json_path.write_text(json.dumps({'experiment': 'effsize', 'beta': 0.95, 'scenario_sizes': [10, 20]}))
        assert load_config(json_path).scenario_sizes == [10, 20]

    def test_load_rejects_non_mapping(self, tmp_path):
        path = tmp_path / 'cfg.yaml'
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestMarketData:

    def test_synthetic_market(self):
        mu, sigma = synthetic_market(5, seed=3)
        again_mu, again_sigma = synthetic_market(5, seed=3)
        np.testing.assert_array_equal(mu, again_mu)
        np.testing.assert_array_equal(sigma, again_sigma)
        assert mu.max() == 0.02
        assert np.all(np.linalg.eigvalsh(sigma) > 0)

    def test_load_returns(self, tmp_path):
        rng = np.random.default_rng(0)
        path = tmp_path / 'returns.csv'
        pd.DataFrame(rng.normal(0.01, 0.05, (24, 3)), columns=['A', 'B', 'C']).to_csv(path, index=False)
        mu, sigma, assets = load_returns(path)
        assert assets == ['A', 'B', 'C']
        assert mu.shape == (3,) and sigma.shape == (3, 3)

    def test_load_returns_rejects_text(self, tmp_path):
        path = tmp_path / 'returns.csv'
        path.write_text("A,B\n0.01,x\n0.02,0.03\n")
        with pytest.raises(DomainError):
            load_returns(path)


class TestGenerate:

    def test_example(self, tmp_path):
        out = tmp_path / 's.csv'
        assert main(['gen', '--d', '2', '--beta', '0.95', '--region', 'orthant', '--n-risk', '100',
                     '--seed', '7', '--out', str(out)]) == 0
        frame = pd.read_csv(out)
        assert list(frame.columns) == ['p', 'y1', 'y2']
        assert frame.shape[0] == 101
        assert abs(frame['p'].sum() - 1.0) <= 1e-12

        summary = read_json(tmp_path / 's.json')
        assert summary['n_risk'] == 100
        assert summary['seed'] == 7
        assert summary['effective_sample_size'] >= 101

    def test_byte_identical_reruns(self, tmp_path):
        args = ['gen', '--d', '3', '--beta', '0.9', '--region', 'monotonic', '--rho', '0.3',
                '--n-risk', '50', '--seed', '11']
        assert main(args + ['--out', str(tmp_path / 'a.csv')]) == 0
        assert main(args + ['--out', str(tmp_path / 'b.csv')]) == 0
        assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
        assert (tmp_path / 'a.json').read_bytes() == (tmp_path / 'b.json').read_bytes()

    def test_config_file(self, tmp_path):
        cfg = tmp_path / 'cfg.yaml'
        cfg.write_text("beta: 0.9\nd: 2\nn_risk: 10\nregions: [ellipsoid]\n")
        assert main(['gen', '--config', str(cfg), '--out', str(tmp_path / 'g.csv')]) == 0
        assert pd.read_csv(tmp_path / 'g.csv').shape[0] == 11

    def test_missing_beta(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as info:
            main(['gen', '--d', '2', '--out', str(tmp_path / 's.csv')])
        assert info.value.code == 2
        assert 'beta' in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / 'cfg.yaml'
        cfg.write_text("beta: 0.9\nmystery: 1\n")
        with pytest.raises(SystemExit) as info:
            main(['gen', '--config', str(cfg)])
        assert info.value.code == 2

    def test_invalid_beta_exit_code(self, tmp_path):
        assert main(['gen', '--beta', '1.5', '--out', str(tmp_path / 's.csv')]) == 2


class TestProbCurves:

    def test_table(self, tmp_path):
        assert main(['prob-curves', '--d-max', '3', '--beta', '0.95,0.99', '--mc-samples', '2000',
                     '--survivor-samples', '2000', '--out', str(tmp_path)]) == 0
        frame = pd.read_csv(tmp_path / 'prob_curves_0.csv')
        assert list(frame.columns) == PROB_CURVE_COLUMNS
        # ellipsoid + orthant + monotonic at two equicorrelations
        assert frame.shape[0] == 3 * 2 * 4
        assert frame['q_estimate'].between(0.0, 1.0).all()

        ellipsoid = frame[(frame.region_kind == 'ellipsoid') & np.isclose(frame.beta, 0.95)].sort_values('d')
        assert ellipsoid[ellipsoid.d == 2].q_estimate.iloc[0] == pytest.approx(0.7415, abs=1e-3)
        assert ellipsoid.q_estimate.is_monotonic_decreasing

        orthant = frame[(frame.region_kind == 'orthant') & np.isclose(frame.beta, 0.95) & (frame.d == 2)]
        assert orthant.q_estimate.iloc[0] > ellipsoid[ellipsoid.d == 2].q_estimate.iloc[0]

        summary = read_json(tmp_path / 'prob_curves_0.json')
        assert summary['n_rows'] == 24


class TestEffsize:

    ARGS = ['effsize', '--d', '2', '--beta', '0.95', '--region', 'orthant', '--sizes', '20,40',
            '--reps', '10', '--seed', '3']

    def test_table_and_worker_independence(self, tmp_path):
        assert main(self.ARGS + ['--workers', '1', '--out', str(tmp_path / 'one.csv')]) == 0
        assert main(self.ARGS + ['--workers', '3', '--out', str(tmp_path / 'three.csv')]) == 0
        assert (tmp_path / 'one.csv').read_bytes() == (tmp_path / 'three.csv').read_bytes()
        assert without_workers(read_json(tmp_path / 'one.json')) == \
            without_workers(read_json(tmp_path / 'three.json'))

        frame = pd.read_csv(tmp_path / 'one.csv')
        assert list(frame.columns) == EFFSIZE_COLUMNS
        assert list(frame.n) == [20, 40]
        assert (frame.q_std_error == 0.0).all()
        assert (frame.mean_N_empirical >= frame.n).all()

    def test_whole_space(self, tmp_path):
        assert main(['effsize', '--d', '2', '--beta', '0.95', '--region', 'whole', '--sizes', '10',
                     '--reps', '3', '--out', str(tmp_path / 'w.csv')]) == 0
        row = pd.read_csv(tmp_path / 'w.csv').iloc[0]
        assert row.q == 0.0
        assert row.mean_N_empirical == 10.0
        assert row.mean_effective_size == 11.0
        assert row.z_score == 0.0

    def test_trace(self, tmp_path):
        trace = tmp_path / 'trace.jsonl'
        assert main(self.ARGS + ['--out', str(tmp_path / 'e.csv'), '--trace', str(trace)]) == 0
        with jsonlines.open(trace) as reader:
            records = list(reader)
        assert len(records) == 20
        assert {r['n'] for r in records} == {20, 40}


class TestStability:

    def test_outputs_and_worker_independence(self, tmp_path):
        trace = tmp_path / 'trace.jsonl'
        assert main(STABILITY_ARGS + ['--workers', '1', '--out', str(tmp_path / 'one.csv'),
                                      '--trace', str(trace)]) == 0
        assert main(STABILITY_ARGS + ['--workers', '2', '--out', str(tmp_path / 'two.csv')]) == 0
        assert (tmp_path / 'one.csv').read_bytes() == (tmp_path / 'two.csv').read_bytes()

        summary = read_json(tmp_path / 'one.json')
        assert without_workers(summary) == without_workers(read_json(tmp_path / 'two.json'))
        assert summary['experiment'] == 'stability'
        assert len(summary['cells']) == 4 * 2
        for cell in summary['cells']:
            assert len(cell['gap_samples']) == 3
            assert all(g >= 0.0 for g in cell['gap_samples'])
            assert cell['std_error'] >= 0.0
            assert cell['mean_scenarios'] <= cell['scenario_size']
        assert set(summary['q_estimates']) == {'agg_monotonic', 'agg_cone', 'agg_reduction'}
        assert 0.0 < summary['q_estimates']['agg_cone']['q'] < 1.0

        with jsonlines.open(trace) as reader:
            assert len(list(reader)) == 4 * 2 * 3

    def test_report_cli(self, tmp_path, capsys):
        assert main(STABILITY_ARGS + ['--out', str(tmp_path / 's.csv')]) == 0
        capsys.readouterr()
        assert report_main([str(tmp_path / 's.json')]) == 0
        out = capsys.readouterr().out
        assert 'MEAN OPTIMALITY GAP' in out
        assert 'AGGREGATION REGION PROBABILITY' in out

    def test_report_rejects_other_experiments(self, tmp_path):
        assert main(['gen', '--d', '2', '--beta', '0.9', '--n-risk', '5', '--out', str(tmp_path / 'g.csv')]) == 0
        assert report_main([str(tmp_path / 'g.json')]) == 2

    def test_unreachable_target_is_numeric_failure(self, tmp_path):
        assert main(['stability', '--d', '3', '--beta', '0.95', '--t', '0.5', '--sizes', '20',
                     '--reps', '2', '--out', str(tmp_path / 's.csv')]) == 3

    def test_binding_target_misses_carry_a_gap(self):
        # synthetic markets top out at a mean of 0.02, so t = 0.018 binds at x*
        cfg = preset('d5_beta95').updated(scenario_sizes=[50], n_replications=20, workers=1,
                                          methods=['sampling', 'agg_cone'], t=0.018)
        report = ExperimentRunner(cfg).run_stability()
        assert report.exact['return_multiplier'] > 0.0

        misses = [o for o in report.trace if o['return_shortfall'] > 1e-6]
        assert misses
        for o in misses:
            assert o['return_violation']
            assert o['gap'] > 0.0
            assert o['gap'] == pytest.approx(
                o['raw_gap'] + report.exact['return_multiplier'] * o['return_shortfall'], abs=1e-12)
        for cell in report.cells:
            assert len(cell.gap_samples) == 20
            assert all(g >= 0.0 for g in cell.gap_samples)
            assert cell.return_violations == sum(
                o['return_violation'] for o in report.trace
                if o['method'] == cell.method and o['scenario_size'] == cell.scenario_size)

    def test_runner_api(self):
        cfg = ExperimentConfig.from_mapping({
            'experiment': 'stability', 'd': 3, 'beta': 0.95, 'scenario_sizes': [30],
            'n_replications': 2, 'methods': ['sampling', 'agg_cone'], 't': '-inf',
        })
        report = ExperimentRunner(cfg).run_stability()
        assert report.problem['t'] is None
        assert len(report.mean_gaps('agg_cone')) == 1
        assert report.cell('sampling', 30).scenario_size == 30
        assert report.to_frame().shape[0] == 2
        with pytest.raises(KeyError):
            report.cell('sampling', 31)


@pytest.mark.slow
def test_exact_region_beats_sampling():
    cfg = preset('d5_beta95').updated(scenario_sizes=[50, 100, 200, 500], workers=4,
                                      methods=['sampling', 'agg_monotonic', 'agg_cone'])
    report = ExperimentRunner(cfg).run_stability()
    for size in cfg.scenario_sizes:
        assert report.cell('agg_cone', size).mean_gap <= report.cell('sampling', size).mean_gap
    assert report.cell('agg_cone', 500).std_error <= report.cell('agg_monotonic', 500).std_error
    for method in cfg.methods:
        assert StabilityMetrics.count_inversions(report.mean_gaps(method)) <= 1
