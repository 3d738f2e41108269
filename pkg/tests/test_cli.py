"""Tests for CLI interface"""
import importlib
import json

import pytest
from click.testing import CliRunner

from bregqn.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, cli, main


@pytest.fixture
def runner(monkeypatch):
    monkeypatch.setenv('QN_THREADS', '1')
    return CliRunner()


class TestCLIHelp:
    """Test help and version output"""

    def test_main_help(self, runner):
        """Should list every command"""
        result = runner.invoke(cli, ['--help'])

        assert result.exit_code == 0
        for command in ('validate', 'solve', 'influence', 'repro'):
            assert command in result.output

    def test_repro_help(self, runner):
        """Should list both experiments"""
        result = runner.invoke(cli, ['repro', '--help'])

        assert result.exit_code == 0
        assert 'table2' in result.output
        assert 'table3' in result.output

    def test_version(self, runner):
        """Should print the version"""
        result = runner.invoke(cli, ['--version'])

        assert result.exit_code == 0
        assert 'qn' in result.output


class TestImport:
    """Test the package imports"""

    @pytest.mark.parametrize('module', ['bregqn.cli', 'bregqn.experiments', 'bregqn.experiments.table2'])
    def test_import(self, module):
        """Should import without building invalid default configs"""
        assert importlib.import_module(module).__name__ == module


class TestCLIValidate:
    """Test validate command"""

    def test_validate_pass(self, runner):
        """Should pass the power potential with gamma = -1"""
        result = runner.invoke(cli, ['validate', '--potential', 'power:gamma=-1', '--n', '10'])

        assert result.exit_code == EXIT_OK
        assert 'result: pass' in result.output

    def test_validate_fail(self, runner):
        """Should exit 2 when beta reaches 1/n"""
        result = runner.invoke(cli, ['validate', '--potential', 'power:gamma=0.25', '--n', '4'])

        assert result.exit_code == EXIT_NUMERICAL
        assert 'result: fail' in result.output
        assert 'violation' in result.output

    def test_validate_unknown_potential(self, runner):
        """Should exit 1 on an unknown potential"""
        result = runner.invoke(cli, ['validate', '--potential', 'sqrt', '--n', '3'])

        assert result.exit_code == EXIT_USAGE
        assert 'Unknown potential' in result.output


class TestCLISolve:
    """Test solve command"""

    def test_solve_exact(self, runner):
        """Should converge on p1 with n = 2"""
        result = runner.invoke(cli, ['solve', '--problem', 'p1', '--n', '2', '--ls', 'exact'])

        assert result.exit_code == EXIT_OK
        assert 'outcome: Converged' in result.output
        assert 'family: vbfgs-b, potential: neglog' in result.output

    def test_solve_json(self, runner, temp_dir):
        """Should write the trace as JSON"""
        path = temp_dir / 'trace.json'
        result = runner.invoke(cli, [
            'solve', '--problem', 'p2', '--n', '5',
            '--family', 'vdfp-h', '--potential', 'power:gamma=-1',
            '--random-start', '--seed', '7',
            '--json', str(path),
        ])

        assert result.exit_code == EXIT_OK
        payload = json.loads(path.read_text())
        assert payload['outcome'] == 'Converged'
        assert payload['config']['family'] == 'vdfp-h'
        assert len(payload['x']) == 5

    def test_solve_trace_with_noise(self, runner, temp_dir):
        """Should accept --h and write the noisy trace to --trace"""
        path = temp_dir / 'out.json'
        result = runner.invoke(cli, [
            'solve', '--problem', 'p1', '--n', '10', '--h', '0.1', '--seed', '42', '--trace', str(path),
        ])

        assert result.exit_code == EXIT_OK
        payload = json.loads(path.read_text())
        assert payload['config']['noise'] == 0.1
        assert payload['config']['seed'] == 42
        assert payload['config']['n'] == 10
        assert len(payload['records']) == payload['iterations']

    def test_solve_line_search_constants(self, runner, temp_dir):
        """Should pass --c1, --c2 and --tolx through to the line search"""
        path = temp_dir / 'trace.json'
        result = runner.invoke(cli, [
            'solve', '--n', '4', '--c1', '1e-3', '--c2', '0.5', '--tolx', '1e-8', '--trace', str(path),
        ])

        assert result.exit_code == EXIT_OK
        line_search = json.loads(path.read_text())['config']['line_search']
        assert line_search['c1'] == 1e-3
        assert line_search['c2'] == 0.5
        assert line_search['tol_x'] == 1e-8

    def test_solve_bad_wolfe_constants(self, runner):
        """Should exit 1 when c1 is not below c2"""
        result = runner.invoke(cli, ['solve', '--n', '2', '--c1', '0.9', '--c2', '0.5'])

        assert result.exit_code == EXIT_USAGE

    def test_solve_max_iter(self, runner):
        """Should warn but exit 0 when max_iter is reached"""
        result = runner.invoke(cli, ['solve', '--problem', 'p2', '--n', '10', '--max-iter', '1'])

        assert result.exit_code == EXIT_OK
        assert 'outcome: MaxIter' in result.output
        assert 'max_iter=1' in result.output

    def test_solve_start_point(self, runner):
        """Should start from --x0"""
        result = runner.invoke(cli, ['solve', '--n', '2', '--x0', '1,1'])

        assert result.exit_code == EXIT_OK
        assert 'iterations: 0' in result.output

    @pytest.mark.parametrize('args', [
        ['--family', 'sr1'],
        ['--potential', 'power:gamma=0.5'],
        ['--x0', '1,2,3'],
        ['--x0', '1,abc'],
        ['--noise', '-0.1'],
    ])
    def test_solve_invalid_input(self, runner, args):
        """Should exit 1 on invalid input"""
        result = runner.invoke(cli, ['solve', '--n', '2'] + args)

        assert result.exit_code == EXIT_USAGE
        assert 'Error' in result.output


class TestCLIInfluence:
    """Test influence command"""

    def test_influence_csv(self, runner, temp_dir):
        """Should print the probe and write its CSV"""
        path = temp_dir / 'probe.csv'
        result = runner.invoke(cli, [
            'influence', '--family', 'vbfgs-b', '--potential', 'neglog',
            '--n', '5', '--probe', 'fixed-det', '--a', '1,10,100', '--seed', '3',
            '--out', str(path),
        ])

        assert result.exit_code == EXIT_OK
        assert 'verdict: bounded' in result.output
        lines = path.read_text().splitlines()
        assert lines[0].startswith('# ')
        assert 'influence' in lines[0]
        assert '--seed 3' in lines[0]
        assert lines[1] == 'probe_param,closed_form_norm,fd_norm_eps1e-4,agreement'
        assert len(lines) == 5

    def test_influence_growing(self, runner):
        """Should report growth for V-DFP-B under scaling"""
        result = runner.invoke(cli, ['influence', '--family', 'vdfp-b', '--probe', 'scaling', '--c', '1,10,100,1000'])

        assert result.exit_code == EXIT_OK
        assert 'verdict: growing' in result.output

    def test_influence_broyden(self, runner):
        """Should exit 1 for a Broyden family"""
        result = runner.invoke(cli, ['influence', '--family', 'broyden:theta=0.5,v1=neglog,v2=neglog'])

        assert result.exit_code == EXIT_USAGE
        assert 'broyden' in result.output

    def test_influence_small_dimension(self, runner):
        """Should exit 1 when fixed-det needs a larger n"""
        result = runner.invoke(cli, ['influence', '--n', '2', '--probe', 'fixed-det'])

        assert result.exit_code == EXIT_USAGE


class TestCLIRepro:
    """Test repro commands"""

    def test_table2(self, runner, temp_dir):
        """Should write records and means"""
        out = temp_dir / 'table2.csv'
        result = runner.invoke(cli, [
            'repro', 'table2', '--dims', '4', '--gammas=-1,0', '--trials', '1', '--seed', '5', '--out', str(out),
        ])

        assert result.exit_code == EXIT_OK
        assert out.exists()
        assert (temp_dir / 'table2_means.csv').exists()
        assert out.read_text().splitlines()[1].startswith('setup,family,gamma,n,trial')

    def test_table2_reproducible(self, runner, temp_dir):
        """Should write identical bytes for the same seed"""
        args = ['repro', 'table2', '--dims', '4', '--setups', 'Spike', '--trials', '2', '--seed', '5']
        first, second = temp_dir / 'a' / 'table2.csv', temp_dir / 'b' / 'table2.csv'
        assert runner.invoke(cli, args + ['--out', str(first)]).exit_code == 0
        assert runner.invoke(cli, args + ['--out', str(second)]).exit_code == 0

        assert first.read_text() == second.read_text()

    def test_table3(self, runner, temp_dir):
        """Should write iteration records with a gnuplot script"""
        out = temp_dir / 'table3.csv'
        result = runner.invoke(cli, [
            'repro', 'table3', '--problems', 'p1', '--dims', '3', '--h', '0,0.1',
            '--runs', '1', '--out', str(out), '--gnuplot',
        ])

        assert result.exit_code == EXIT_OK
        assert (temp_dir / 'table3_means.gp').exists()
        rows = out.read_text().splitlines()[2:]
        assert len(rows) == 2 * 2

    def test_table3_unknown_method(self, runner, temp_dir):
        """Should exit 1 on an unknown method"""
        result = runner.invoke(cli, ['repro', 'table3', '--methods', 'sr1', '--out', str(temp_dir / 't.csv')])

        assert result.exit_code == EXIT_USAGE
        assert 'Unknown method' in result.output


class TestCLIConfig:
    """Test --save-config and --config"""

    def test_round_trip(self, runner, temp_dir):
        """Should reproduce a run from its saved options"""
        config_file = temp_dir / 'solve.cfg'
        first = runner.invoke(cli, [
            'solve', '--problem', 'p2', '--n', '4', '--family', 'vdfp-b', '--ls', 'exact',
            '--save-config', str(config_file),
        ])
        assert first.exit_code == EXIT_OK
        text = config_file.read_text()
        assert 'family = vdfp-b' in text
        assert 'ls-mode = exact' in text

        second = runner.invoke(cli, ['--config', str(config_file), 'solve'])

        assert second.exit_code == EXIT_OK
        assert 'problem: p2 (n=4)' in second.output
        assert 'family: vdfp-b' in second.output
        iterations = [line for line in first.output.splitlines() if line.startswith('iterations')]
        assert iterations == [line for line in second.output.splitlines() if line.startswith('iterations')]

    def test_flags_override_config(self, runner, temp_dir):
        """Should let command-line flags win over the config file"""
        config_file = temp_dir / 'qn.cfg'
        config_file.write_text('n = 3\nproblem = p2\n')
        result = runner.invoke(cli, ['--config', str(config_file), 'solve', '--n', '2'])

        assert result.exit_code == EXIT_OK
        assert 'problem: p2 (n=2)' in result.output

    def test_malformed_config(self, runner, temp_dir):
        """Should exit 1 on a malformed config file"""
        config_file = temp_dir / 'bad.cfg'
        config_file.write_text('this line has no equals sign\n')
        result = runner.invoke(cli, ['--config', str(config_file), 'solve'])

        assert result.exit_code == EXIT_USAGE


class TestMain:
    """Test main() exit codes"""

    def test_success(self):
        """Should return 0 after a converged solve"""
        assert main(['solve', '--problem', 'p1', '--n', '2', '--ls', 'exact']) == EXIT_OK

    def test_validation_error(self):
        """Should return 1 on invalid input"""
        assert main(['solve', '--family', 'sr1']) == EXIT_USAGE

    def test_usage_error(self, temp_dir):
        """Should return 1 on click usage errors"""
        assert main(['--config', str(temp_dir / 'missing.cfg'), 'solve']) == EXIT_USAGE
        assert main(['nope']) == EXIT_USAGE

    def test_numerical_failure(self):
        """Should return 2 when the potential check fails"""
        assert main(['validate', '--potential', 'power:gamma=0.25', '--n', '4']) == EXIT_NUMERICAL
