import math
import warnings

import pytest

from nrblockade.cli import shipped_config
from nrblockade.config import ConfigNote, emit_config, format_phase, parse_config, parse_real
from nrblockade.errors import ConfigurationError
from nrblockade.model import PRESETS, preset
from nrblockade.sweep import SweepSpec, default_sweep

MINIMAL = """\
[mode]
label = a
kerr = 5
gamma = 1

[mode]
label = b   # linear cavity
kerr = 0
gamma = 1

[coupling]
from = a
to = b
g = 0.5

[drive]
target = a
epsilon = 0.01

[sweep]
variable = detuning
start = -1
stop = 1
points = 5
drive_ports = a, b
"""


@pytest.mark.parametrize("name", PRESETS)
def test_presets_round_trip(name):
    model, sweep = parse_config(emit_config(preset(name), default_sweep(name)))
    assert model == preset(name)
    assert sweep == default_sweep(name)


@pytest.mark.parametrize("name", PRESETS)
def test_shipped_configs_match_presets(name):
    model, sweep = parse_config(shipped_config(name))
    assert model == preset(name) and sweep == default_sweep(name)


def test_shipped_fig2_sweep():
    _, sweep = parse_config(shipped_config("fig2_asym_molecule"))
    assert (sweep.variable, sweep.start, sweep.stop, sweep.points) == ("detuning", -10, 10, 401)


def test_minimal_document_defaults():
    model, sweep = parse_config(MINIMAL)
    assert model.labels == ("a", "b")
    assert model.truncation.per_mode_caps == (3, 3) and model.truncation.total_cap == 3
    assert model.couplings[0].phase == 0.0
    assert sweep.drive_ports == ("a", "b")


@pytest.mark.parametrize(
    "text,value",
    [("0.5pi", math.pi / 2), ("pi", math.pi), ("-pi", -math.pi), ("2*pi", 2 * math.pi),
     ("1.5 pi", 1.5 * math.pi), ("-0.25", -0.25), ("1e-3", 1e-3)],
)
def test_parse_real(text, value):
    assert parse_real(text) == value


def test_format_phase_round_trips():
    for phi in (math.pi / 2, 1.5 * math.pi, 0.3, 2 * math.pi / 3):
        assert parse_real(format_phase(phi)) == phi


def test_undeclared_mode_reports_name_and_line():
    text = MINIMAL.replace("to = b", "to = q")
    with pytest.raises(ConfigurationError) as err:
        parse_config(text)
    (msg,) = err.value.messages
    assert "'q'" in msg and msg.startswith("line 13:")


def test_all_errors_reported_together():
    text = MINIMAL.replace("kerr = 0", "kerr = zero").replace("points = 5", "points = 5\ncolour = red")
    text = text.replace("epsilon = 0.01", "")
    with pytest.raises(ConfigurationError) as err:
        parse_config(text)
    msgs = err.value.messages
    assert any("line 8:" in m and "kerr" in m for m in msgs)
    assert any("unknown key 'colour'" in m for m in msgs)
    assert any("missing required key 'epsilon'" in m for m in msgs)


def test_syntax_errors():
    with pytest.raises(ConfigurationError) as err:
        parse_config("stray = 1\n[bogus]\n" + MINIMAL + "[drive]\ntarget = a\nepsilon = 1\njunk\n")
    text = " ".join(err.value.messages)
    assert "outside any section" in text
    assert "unknown section [bogus]" in text
    assert "[drive] appears more than once" in text
    assert "expected 'key = value'" in text


def test_full_turn_phase_normalised_with_note():
    text = MINIMAL.replace("g = 0.5", "g = 0.5\nphase = 2pi")
    with pytest.warns(ConfigNote, match="normalized"):
        model, _ = parse_config(text)
    assert model.couplings[0].phase == 0.0


def test_empty_drive_ports_rejected():
    with pytest.raises(ConfigurationError, match="drive port"):
        parse_config(MINIMAL.replace("drive_ports = a, b", "drive_ports ="))


def test_sweep_ports_must_exist_and_phase_needs_loop():
    with pytest.raises(ConfigurationError) as err:
        parse_config(MINIMAL.replace("drive_ports = a, b", "drive_ports = a, z")
                     .replace("variable = detuning", "variable = phase"))
    text = " ".join(err.value.messages)
    assert "'z'" in text and "loop" in text


def test_truncation_section():
    model, _ = parse_config(MINIMAL + "[truncation]\nper_mode_cap = 2, 4\ntotal_cap = 4\n")
    assert model.truncation.per_mode_caps == (2, 4)
    with pytest.raises(ConfigurationError):
        parse_config(MINIMAL + "[truncation]\nper_mode_cap = 2, 4, 4\n")


def test_nonpositive_epsilon_rejected():
    with pytest.raises(ConfigurationError, match="epsilon"):
        parse_config(MINIMAL.replace("epsilon = 0.01", "epsilon = 0"))


def test_sweep_spec_invariants():
    with pytest.raises(ConfigurationError):
        SweepSpec("detuning", 1.0, -1.0, 5, ("a",))
    with pytest.raises(ConfigurationError):
        SweepSpec("flux", 0.0, 1.0, 5, ("a",))
    assert list(SweepSpec("detuning", 0.5, 0.5, 1, ("a",)).grid()) == [0.5]
