import json
import math

import numpy as np
import pytest

import dampwave as dw


def test_constant_damping_closed_form():
    c = 0.1
    model = dw.build_torus_model(2, dw.DampingSpec.constant(c))
    spec = dw.eigenfrequencies(model)
    taus = np.array(spec.taus())
    lam = sorted({k1 * k1 + k2 * k2 for k1 in range(-2, 3) for k2 in range(-2, 3)} - {0})
    oracle = [0, 2j * c] + [1j * c + s * math.sqrt(l - c * c) for l in lam for s in (1, -1)]
    assert len(taus) > 0
    for t in taus:
        assert min(abs(t - o) for o in oracle) < 1e-8


def test_model_matrices_are_numpy():
    model = dw.build_sphere_model(8, dw.DampingSpec.zonal_caps(0.5, 4))
    assert model.dim == 81
    assert np.allclose(model.K, model.K.conj().T)
    assert np.all(np.linalg.eigvalsh(model.A) > -1e-12)


def test_resolvent_and_validation():
    model = dw.build_torus_model(1, dw.DampingSpec.constant(0.2))
    tau = 0.5 - 1j
    direct = model.K + 2j * tau * model.A - tau * tau * np.eye(model.dim)
    expect = 1.0 / np.linalg.svd(direct, compute_uv=False).min()
    assert dw.resolvent_norm(model, tau) == pytest.approx(expect, rel=1e-10)
    with pytest.raises(ValueError):
        dw.build_torus_model(1, dw.DampingSpec.constant(-1.0))


def test_propagation_and_zero_mode():
    c = 0.25
    model = dw.build_torus_model(2, dw.DampingSpec.constant(c))
    gen = dw.assemble_generator(model)
    assert dw.zero_mode(model.constant_coeffs, model) == pytest.approx(1j / (2 * c))
    f = dw.random_vector(model.dim, 1)
    a = dw.propagate(gen, f, [0.0, 1.0, 2.0])
    b = dw.propagate(gen, f, [0.0, 1.0, 2.0], dw.PropagationMethod.stepper)
    assert np.allclose(a[0].u1, f) and np.all(a[0].u0 == 0)
    for x, y in zip(a, b):
        assert np.linalg.norm(x.u0 - y.u0) <= 1e-7 * max(1.0, np.linalg.norm(x.u0))
    assert dw.energy(a[2], model) <= dw.energy(a[1], model) + 1e-12


def test_geodesics():
    orbit = dw.geodesic_flow(dw.FlowGeometry.sphere(), dw.sphere_point(1.0, 0.3, 0.7), 3.3)
    assert orbit.period == pytest.approx(math.pi, abs=1e-8)
    prof = dw.RevolutionProfile.sin_cubed(0.3)
    geom = dw.FlowGeometry.revolution(prof)
    eq = dw.geodesic_flow(geom, dw.equator_point(prof), 1.1 * math.pi * 1.3)
    pd = dw.poincare_map(geom, eq, 4)
    assert pd["classification"] == "elliptic-nondegenerate"
    curve = dw.estimate_A(dw.FlowGeometry.torus(), dw.DampingSpec.constant(0.3), [5, 10], dw.SamplingGrid(4, 4, 8))
    assert curve.A_inf_hat == pytest.approx(0.3)


def test_run_command(tmp_path):
    manifest = dw.run_command("spectrum", "truncation:\n  kmax: 1\n", str(tmp_path))
    assert manifest["command"] == "spectrum"
    names = {f["file"] for f in manifest["files"]}
    assert "spectrum.csv" in names
    doc = json.loads((tmp_path / "spectrum.json").read_text())
    assert doc["config"]["truncation"]["kmax"] == 1
    with pytest.raises(ValueError):
        dw.run_command("spectrum", "nonsense_key: 1\n", str(tmp_path))
