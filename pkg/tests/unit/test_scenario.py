from pathlib import Path

import pytest

from src.common.constants import ClosureMode, RunMode
from src.driver.scenario import ScenarioError, build_scenario, load_scenario
from src.fem.mesh import box_mesh, write_mesh

PROJECT_ROOT = Path(__file__).resolve().parents[2]

INI = """\
[scenario]
name = custom
mode = mp

[material]
E = 70000
nu = 0.3
sigma0 = 250    ; MPa
sigma_inf = 300
a = 10
backstress = 5000:50, 20000:400
ell = 1.5

[damage]
isotropic = 0.9 0.8 0.01 1.0 2.0
unilateral = 0.9, 0.1, 0.01, 1.0, 1.5
closure = step

[protocol]
amplitude = 0.012
ratio = -1
cycles = 3

[solver]
tol = 1e-9
"""


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_ini(tmp_path):
    scenario = load_scenario(_write(tmp_path, "custom.ini", INI))
    assert scenario.name == "custom"
    assert scenario.mode is RunMode.MATPOINT
    mat = scenario.material
    assert mat.elastic.E == 70000.0
    assert mat.isotropic.sigma_inf == 300.0
    assert [(c.h, c.b) for c in mat.kinematic.components] == [(5000.0, 50.0), (20000.0, 400.0)]
    assert mat.ell == 1.5
    assert mat.damage.closure is ClosureMode.HEAVISIDE
    assert mat.damage.unilateral.k3 == 1.5
    assert mat.damage.isotropic.w_min == pytest.approx(1e-8)
    assert scenario.protocol.cycles == 3
    assert scenario.return_mapping_tol() == pytest.approx(250e-9)
    assert scenario.output.prefix == "custom"


def test_load_yaml_with_preset(tmp_path):
    text = """\
scenario: {name: kin, mode: matpoint}
material:
  preset: aw7020-t6-plastic
  backstress: [[7500, 100]]
damage:
  preset: ct
  w_min: 1.0e-6
protocol: {amplitude: 0.01, cycles: 2, points_per_quarter: 8}
output: {prefix: kin_run, directory: out}
"""
    scenario = load_scenario(_write(tmp_path, "kin.yaml", text))
    assert scenario.material.isotropic.sigma0 == 215.0
    assert len(scenario.material.kinematic) == 1
    assert scenario.material.damage.isotropic.k3 == 0.8
    assert scenario.material.damage.unilateral.w_min == 1e-6
    assert scenario.output.prefix == "kin_run"
    assert scenario.output.directory == Path("out")
    assert scenario.return_mapping_tol() is None


def test_default_output_directory_from_settings(elastic_ini, tmp_path):
    scenario = load_scenario(elastic_ini())
    assert scenario.output.directory == tmp_path / "results"


def test_sigma_y_gives_constant_yield(tmp_path):
    text = "[material]\nE = 75000\nnu = 0.3\nsigma_y = 235\nbackstress = none\n"
    text += "[protocol]\namplitude = 0.01\n"
    scenario = load_scenario(_write(tmp_path, "perfect.ini", text))
    iso = scenario.material.isotropic
    assert (iso.sigma0, iso.sigma_inf, iso.a) == (235.0, 235.0, 0.0)
    assert len(scenario.material.kinematic) == 0
    assert scenario.name == "perfect"


def test_mesh_path_relative_to_scenario(tmp_path):
    (tmp_path / "meshes").mkdir()
    write_mesh(box_mesh(4.0, 2.0, 1.0, 2, 1, 1), tmp_path / "meshes" / "box.msh")
    text = """\
scenario: {mode: fem}
material: {preset: kinematic-demo-perfect}
protocol: {amplitude: 0.001}
mesh: {path: meshes/box.msh}
"""
    scenario = load_scenario(_write(tmp_path, "box.yml", text))
    assert scenario.mesh.path == tmp_path / "meshes" / "box.msh"
    assert scenario.mesh.build().n_elements == 2


def test_generated_mesh_spec(small_plate_yaml):
    scenario = load_scenario(small_plate_yaml, "fe")
    mesh = scenario.mesh.build()
    assert mesh.n_elements == 7
    assert "cod" in mesh.node_sets


@pytest.mark.parametrize(
    "text,match",
    [
        ("[material]\npreset = aw7020-t6\n", "required"),
        ("[material]\npreset = steel\n[protocol]\namplitude = 0.01\n", "Unknown preset"),
        ("[material]\npreset = aw7020-t6\ncolour = red\n[protocol]\namplitude = 0.01\n", "colour"),
        ("[material]\npreset = aw7020-t6\n[protocol]\namplitude = 0.01\n[extras]\nx = 1\n", "extras"),
        ("[material]\npreset = aw7020-t6\n[protocol]\namplitude = -0.01\n", "amplitude"),
        (
            "[material]\npreset = aw7020-t6\n[damage]\nisotropic = 0.9 0.8 1\n"
            "[protocol]\namplitude = 0.01\n",
            "5 values",
        ),
        (
            "[material]\npreset = aw7020-t6\n[damage]\npreset = brittle\n"
            "[protocol]\namplitude = 0.01\n",
            "Allowed",
        ),
        (
            "[material]\npreset = aw7020-t6\n[protocol]\namplitude = 0.01\n"
            "[mesh]\npath = missing.msh\n",
            "mesh file not found",
        ),
        ("[material\npreset = x\n", "malformed"),
    ],
)
def test_invalid_scenarios(tmp_path, text, match):
    path = _write(tmp_path, "bad.ini", text)
    with pytest.raises(ScenarioError, match=match) as info:
        load_scenario(path)
    assert info.value.path == path


def test_mode_mismatch(elastic_ini):
    with pytest.raises(ScenarioError, match="declares mode 'matpoint'"):
        load_scenario(elastic_ini(), RunMode.FEM)


def test_unsupported_suffix(tmp_path):
    with pytest.raises(ScenarioError, match="unsupported"):
        load_scenario(_write(tmp_path, "run.toml", "x = 1\n"))


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="not found"):
        load_scenario(tmp_path / "absent.ini")


def test_yaml_must_be_mapping(tmp_path):
    with pytest.raises(ScenarioError, match="mapping"):
        load_scenario(_write(tmp_path, "list.yaml", "- 1\n- 2\n"))


def test_build_scenario_from_dict():
    scenario = build_scenario(
        {"material": {"preset": "split-study"}, "protocol": {"amplitude": 0.02}}
    )
    assert scenario.mode is RunMode.MATPOINT
    assert scenario.material.damage.closure is ClosureMode.NONE


def test_overrides(elastic_ini, tmp_path):
    scenario = load_scenario(elastic_ini(cycles=10))
    changed = scenario.with_overrides(tol=1e-10, max_cycles=4, output_dir=tmp_path / "o")
    assert changed.protocol.cycles == 4
    assert changed.solver.tol == 1e-10
    assert changed.output.directory == tmp_path / "o"
    assert scenario.protocol.cycles == 10
    assert scenario.with_overrides(max_cycles=50).protocol.cycles == 10
    assert scenario.with_overrides() == scenario


@pytest.mark.parametrize(
    "name", ["dogbone_matpoint.ini", "elastic_check.ini", "kinematic_af.yaml", "notched_plate.yaml"]
)
def test_shipped_scenarios_load(name):
    scenario = load_scenario(PROJECT_ROOT / "config" / name)
    assert scenario.protocol.cycles >= 1
