import pytest

from singflow.cli import build_parser, main
from singflow.presets import list_presets

CONFIG = """
[experiment]
name = "blob-conservation"
seed = 5

[params]
atoms = 8
steps = 10
every = 5
"""


class TestParser:
    def test_preset_subcommands(self):
        parser = build_parser()
        for name in list_presets():
            args = parser.parse_args([name, '--resolution', '2'])
            assert args.command == name
            assert args.resolution == 2
            assert not args.assert_only

    def test_run_requires_config(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['run'])


class TestMain:
    def setup_method(self):
        self.config = CONFIG

    def _write_config(self, tmp_path):
        path = tmp_path / 'blob.toml'
        path.write_text(self.config)
        return path

    def test_list(self, capsys):
        assert main(['list']) == 0
        out = capsys.readouterr().out
        for name in list_presets():
            assert name in out

    def test_version(self, capsys):
        assert main(['--version']) == 0
        assert capsys.readouterr().out.startswith('singflow ')

    def test_usage_errors(self, tmp_path):
        assert main([]) == 2
        assert main(['warp-drive']) == 2
        assert main(['blob-conservation', '--resolution', 'fine']) == 2
        assert main(['blob-conservation', '--resolution', '0', '--assert-only']) == 2
        assert main(['run', '--config', str(tmp_path / 'missing.toml')]) == 2

    def test_unknown_parameter_in_config(self, tmp_path, capsys):
        self.config = CONFIG.replace('atoms = 8', 'atomz = 8')
        assert main(['run', '--config', str(self._write_config(tmp_path)), '--assert-only']) == 2
        assert 'atomz' in capsys.readouterr().err

    def test_run_config(self, tmp_path, capsys):
        path = self._write_config(tmp_path)
        assert main(['run', '--config', str(path), '--out', str(tmp_path / 'out')]) == 0
        out = capsys.readouterr().out
        assert '[pass] circulation frozen' in out
        assert (tmp_path / 'out' / 'blob-conservation' / 'invariants.csv').exists()

    def test_preset_with_config_and_assert_only(self, tmp_path, capsys):
        path = self._write_config(tmp_path)
        code = main(['blob-conservation', '--config', str(path), '--out', str(tmp_path), '--assert-only'])
        assert code == 0
        assert 'exit code 0' in capsys.readouterr().out
        assert not (tmp_path / 'blob-conservation').exists()

    def test_compare(self, tmp_path, capsys):
        path = str(self._write_config(tmp_path))
        assert main(['run', '--config', path, '--out', str(tmp_path / 'a')]) == 0
        assert main(['run', '--config', path, '--out', str(tmp_path / 'b')]) == 0
        a, b = tmp_path / 'a' / 'blob-conservation', tmp_path / 'b' / 'blob-conservation'
        assert main(['compare', str(a), str(b)]) == 0
        assert main(['run', '--config', path, '--out', str(tmp_path / 'c'), '--seed', '6']) == 0
        c = tmp_path / 'c' / 'blob-conservation'
        assert main(['compare', str(a), str(c)]) == 1
        assert '[FAIL] invariants.angular_impulse' in capsys.readouterr().out
        assert main(['compare', str(a), str(c), '--tol', 'invariants=10']) == 0
        assert '[pass] invariants.angular_impulse' in capsys.readouterr().out
        assert main(['compare', str(a), str(c), '--tol', 'invariants']) == 2
        assert main(['compare', str(a), str(tmp_path / 'nowhere')]) == 2
