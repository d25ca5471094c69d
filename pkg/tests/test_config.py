import json

import numpy as np
import pytest

from bbm_voting.config import load_config, parse_window, parse_x_grid
from bbm_voting.datums import InitialDatum, parse_datum
from bbm_voting.errors import ConfigError, ValidationError


@pytest.fixture
def write_config(tmp_path):
    def write(payload):
        path = tmp_path / 'experiment.json'
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
        return str(path)
    return write


def test_defaults():
    cfg = load_config()
    assert cfg.n == 10_000
    assert cfg.t == 1.0
    assert cfg.representation == 'outcome'
    assert cfg.solver.dx == 0.02
    assert cfg.front.window == (20.0, 200.0)
    assert cfg.workers == 1


def test_flags_override_file(write_config):
    path = write_config({'n': 500, 't': 2.0, 'solver': {'dx': 0.05}})
    cfg = load_config(path, {'n': 100, 't': None})
    assert cfg.n == 100
    assert cfg.t == 2.0
    assert cfg.solver.dx == 0.05


def test_dotted_section_overrides(write_config):
    path = write_config({'solver': {'x_min': -20.0}})
    cfg = load_config(path, {'solver.dx': 0.1, 'front.window': '10:50'})
    assert cfg.solver.dx == 0.1
    assert cfg.solver.x_min == -20.0
    assert cfg.front.window == (10.0, 50.0)


def test_workers_default_from_environment(monkeypatch):
    monkeypatch.setenv('BBM_VOTING_WORKERS', '3')
    assert load_config().workers == 3


def test_json_syntax_error_has_line_and_column(write_config):
    path = write_config('{\n  "n": 5,\n  "t": \n}')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.location.startswith(f"{path}:4:")


def test_invalid_value_in_file_names_the_field(write_config):
    path = write_config({'n': 0})
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.location == f"{path}:n"


def test_invalid_flag_names_the_command_line():
    with pytest.raises(ConfigError) as info:
        load_config(None, {'n': 0})
    assert info.value.location == "command line:n"


def test_unknown_key_rejected(write_config):
    path = write_config({'replicates': 10})
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.location == f"{path}:replicates"


def test_bad_x_grid_and_datum():
    with pytest.raises(ConfigError) as info:
        load_config(None, {'x': '1:2'})
    assert "min:max:count" in str(info.value)
    with pytest.raises(ConfigError):
        load_config(None, {'datum': 'wobble'})


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config('/nonexistent/experiment.json')


def test_header_items_leave_out_run_plumbing():
    items = load_config(None, {'workers': 4, 'output': 'out.csv'}).header_items()
    assert 'workers' not in items
    assert 'output' not in items
    assert 'summary' not in items
    assert items['solver.dx'] == 0.02
    assert items['front.fit'] == 'both'
    assert items['n'] == 10_000


def test_x_values():
    cfg = load_config(None, {'x': '-2:2:5'})
    np.testing.assert_allclose(cfg.x_values(), [-2.0, -1.0, 0.0, 1.0, 2.0])


@pytest.mark.parametrize("spec, expected", [
    ("-2:2:5", [-2.0, -1.0, 0.0, 1.0, 2.0]),
    ("0.5", [0.5]),
    ("1,2,3", [1.0, 2.0, 3.0]),
    ("3:3:1", [3.0]),
])
def test_parse_x_grid(spec, expected):
    np.testing.assert_allclose(parse_x_grid(spec), expected)


@pytest.mark.parametrize("spec", ["a:b:c", "2:1:5", "0:1:0", "1:2"])
def test_parse_x_grid_errors(spec):
    with pytest.raises(ValidationError):
        parse_x_grid(spec)


def test_parse_window():
    assert parse_window("20:100") == (20.0, 100.0)
    assert parse_window((1, 2)) == (1.0, 2.0)
    with pytest.raises(ValidationError):
        parse_window("100:20")


# --- initial data ---

def test_parse_datum_kinds(tmp_path):
    assert parse_datum("step") == InitialDatum.step(0.0)
    assert parse_datum("step:1.5")(1.0) == 1.0
    assert parse_datum("interval:-1:1")(0.0) == 1.0
    assert parse_datum("constant:0.25")(7.0) == 0.25
    assert parse_datum("bump:0:1:0.5")(0.0) == pytest.approx(0.5)
    flipped = parse_datum("1-step")
    assert flipped(-1.0) == 0.0
    assert flipped(1.0) == 1.0
    table = tmp_path / 'g.csv'
    table.write_text("# initial profile\nx,g\n-1,1\n1,0\n")
    assert parse_datum(f"table:{table}")(0.0) == pytest.approx(0.5)


def test_parse_datum_errors():
    with pytest.raises(ValidationError):
        parse_datum("interval:1")
    with pytest.raises(ValidationError):
        parse_datum("step:left")
    with pytest.raises(ValidationError):
        InitialDatum.interval(1.0, -1.0)


def test_cell_average_puts_half_on_the_jump():
    xs = np.array([-0.1, 0.0, 0.1])
    np.testing.assert_allclose(InitialDatum.step(0.0).cell_average(xs, 0.1), [1.0, 0.5, 0.0], atol=1e-12)


def test_datum_value_range():
    assert InitialDatum.constant(1.5).value_range() == (1.5, 1.5)
    assert InitialDatum.step().flipped().value_range() == (0.0, 1.0)
    assert InitialDatum.bump(height=0.3).flipped().value_range() == pytest.approx((0.7, 1.0))
