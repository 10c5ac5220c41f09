import pytest

from meancut.binet import QuadratureSpec
from meancut.config import Settings, load_settings
from meancut.errors import ConfigError


def test_defaults():
    s = load_settings()
    assert s == Settings()
    assert s.quad_tol == 1e-10
    assert s.series_tol == 1e-8
    assert s.exact_switchover == 2000
    assert s.quadrature_spec() == QuadratureSpec()


def test_process_environment_is_ignored(monkeypatch):
    monkeypatch.setenv("MEANCUT_QUAD_TOL", "1e-3")
    assert load_settings().quad_tol == 1e-10


def test_env_file_then_overrides(tmp_path):
    env = tmp_path / ".env"
    env.write_text("MEANCUT_QUAD_TOL=1e-9\nMEANCUT_N_JOBS=2\nMEANCUT_TAIL_MODE=bound\nOTHER_KEY=x\n")
    s = load_settings(env, n_jobs=4, series_tol=None)
    assert s.quad_tol == 1e-9
    assert s.tail_mode == "bound"
    assert s.n_jobs == 4
    assert s.series_tol == 1e-8


def test_env_file_scientific_integer(tmp_path):
    env = tmp_path / ".env"
    env.write_text("MEANCUT_SERIES_CAP=1e6\n")
    assert load_settings(env).series_cap == 1_000_000


@pytest.mark.parametrize("line", [
    "MEANCUT_NOT_A_SETTING=1",
    "MEANCUT_QUAD_TOL=abc",
    "MEANCUT_QUAD_TOL=-1",
    "MEANCUT_TAIL_MODE=trapezoid",
    "MEANCUT_T_SPLIT=7",
    "MEANCUT_OUTPUT_DIR=reports",
])
def test_bad_env_values(tmp_path, line):
    env = tmp_path / ".env"
    env.write_text(line + "\n")
    with pytest.raises(ConfigError):
        load_settings(env)


def test_missing_env_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_settings(tmp_path / "nope.env")


def test_bad_override():
    with pytest.raises(ConfigError):
        load_settings(n_jobs=0)
    with pytest.raises(ConfigError):
        load_settings(no_such_field=1)
