import pytest

from app.core.config import settings
from app.core.exceptions import ConfigError
from app.core.run_config import SolverConfig, dump_config, load_config, parse_config_text

MINIMAL = '''
[manifold]
n = 3
points_per_axis = 8

[problem]
p = 2.0
h = -0.5
f = -1 - 0.5*cos(2*pi*x1)
a = 0.1
'''

def test_minimal_config_uses_defaults():
    config = parse_config_text(MINIMAL)
    assert config.manifold.points_per_axis == 8
    assert config.problem.f == '-1 - 0.5*cos(2*pi*x1)'
    assert config.solver == SolverConfig()
    assert config.scenario.name is None
    assert config.scenario.eta_list == (0.25, 0.5, 0.75, 1.0, 1.5)

def test_lists_and_inline_comments():
    text = MINIMAL + '\n[scenario]\nname = eigen\neta_list = 0.5, 1.0 # 두 값\nLambda = 2.5\n'
    config = parse_config_text(text)
    assert config.scenario.name == 'eigen'
    assert config.scenario.eta_list == (0.5, 1.0)
    assert config.scenario.Lambda == 2.5

def test_duplicate_key_reports_line():
    text = '[manifold]\nn = 3\nn = 2\npoints_per_axis = 8\n'
    with pytest.raises(ConfigError) as error:
        parse_config_text(text)
    assert error.value.line == 3
    assert '중복' in str(error.value)

def test_missing_section_header():
    with pytest.raises(ConfigError) as error:
        parse_config_text('n = 3\n')
    assert error.value.line == 1

def test_exponent_must_be_below_dimension():
    with pytest.raises(ConfigError, match='1 < p < n'):
        parse_config_text(MINIMAL.replace('p = 2.0', 'p = 3.0'))

def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError, match='solver.tolerance'):
        parse_config_text(MINIMAL + '\n[solver]\ntolerance = 1e-6\n')

@pytest.mark.parametrize('line', ['n = 4', 'n = 1', 'points_per_axis = 3'])
def test_manifold_ranges(line):
    key = line.split(' ')[0]
    text = MINIMAL.replace(f'{key} = {"3" if key == "n" else "8"}', line, 1)
    with pytest.raises(ConfigError):
        parse_config_text(text)

@pytest.mark.parametrize('etas', ['0.5, 0.25', '0.5, -1.0'])
def test_eta_list_validation(etas):
    with pytest.raises(ConfigError):
        parse_config_text(MINIMAL + f'\n[scenario]\neta_list = {etas}\n')

def test_dump_and_reload_match():
    text = MINIMAL + '\n[solver]\nseed = 7\nk_star_factor = 0.03\n\n[scenario]\nname = solve\nprobe_solve = true\n\n[output]\nformats = csv, txt\n'
    config = parse_config_text(text)
    assert parse_config_text(dump_config(config)) == config

@pytest.mark.parametrize('name', ['theorem1_demo.ini', 'theorem2_demo.ini', 'nonexist_demo.ini'])
def test_demo_configs_load(name):
    config = load_config(settings.CONFIG_PATH / name)
    assert config.manifold.n == 3

def test_unreadable_file(tmp_path):
    with pytest.raises(ConfigError, match='읽을 수 없습니다'):
        load_config(tmp_path / 'missing.ini')
