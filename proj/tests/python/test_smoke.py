import numpy as np
import pytest

import gamblet

ROUGH_Q4 = "[problem]\nq = 4\n"


def test_assemble_shapes_and_symmetry():
    d = gamblet.assemble(ROUGH_Q4)
    assert d["n"] == 16
    a = gamblet.to_scipy(d["stiffness"])
    m = gamblet.to_scipy(d["mass"])
    assert a.shape == (256, 256)
    assert abs(a - a.T).max() < 1e-12
    assert np.all(np.linalg.eigvalsh(m.toarray()) > 0)


def test_exact_solve_matches_scipy():
    from scipy.sparse.linalg import spsolve

    d = gamblet.assemble(ROUGH_Q4)
    a = gamblet.to_scipy(d["stiffness"]).tocsc()
    u_ref = spsolve(a, d["rhs"])
    s = gamblet.solve(ROUGH_Q4)
    err = s["u"] - u_ref
    assert np.sqrt(err @ (a @ err)) / np.sqrt(u_ref @ (a @ u_ref)) < 1e-8
    # The increments add up to u.
    assert np.allclose(sum(s["increments"]), s["u"], atol=1e-12)
    assert len(s["increments"]) == 4


def test_fast_solve_close_to_exact():
    exact = gamblet.solve(ROUGH_Q4)
    fast = gamblet.solve(ROUGH_Q4 + "[solver]\npipeline = fast\nepsilon = 1e-4\n")
    a = gamblet.to_scipy(gamblet.assemble(ROUGH_Q4)["stiffness"])
    e = fast["u"] - exact["u"]
    rel = np.sqrt(e @ (a @ e)) / np.sqrt(exact["u"] @ (a @ exact["u"]))
    assert rel < 1e-3
    assert fast["total_flops"] > 0
    assert fast["rho"] == gamblet.schedule(4, 1e-4)


def test_finest_basis_is_mass_inverse_row():
    d = gamblet.assemble("[problem]\nq = 3\n")
    m = gamblet.to_scipy(d["mass"])
    psi = gamblet.basis("[problem]\nq = 3\n", 3, 10)
    e = m @ psi
    expected = np.zeros(64)
    expected[10] = 1.0
    assert np.allclose(e, expected, atol=1e-8)
    with pytest.raises(IndexError):
        gamblet.basis("[problem]\nq = 3\n", 3, 64)


def test_config_errors_and_hash():
    with pytest.raises(gamblet.ConfigError):
        gamblet.solve("[problem]\nq = banana\n")
    h = gamblet.config_hash(ROUGH_Q4)
    assert len(h) == 16
    assert h == gamblet.config_hash(gamblet.canonical_config(ROUGH_Q4))


def test_run_command_exit_codes(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[problem]\nq = 3\n")
    rc, err = gamblet.run("solve", str(cfg), out=str(tmp_path / "out"), threads=1)
    assert rc == 0, err
    assert (tmp_path / "out" / "u.csv").exists()
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\nq = 0\n")
    rc, err = gamblet.run("solve", str(bad), out=str(tmp_path / "out2"))
    assert rc == 2
    assert "problem.q" in err


def test_as_grid_layout():
    u = gamblet.solve("[problem]\nq = 3\n")["u"]
    g = gamblet.as_grid(u)
    assert g.shape == (8, 8)
    assert g[0, 1] == u[1]
    assert g[1, 0] == u[8]
