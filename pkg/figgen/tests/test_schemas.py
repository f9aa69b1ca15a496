import numpy as np
import pytest

from figgen import schemas


def test_missing_file_refused(tmp_path):
    with pytest.raises(schemas.SchemaError, match="missing"):
        schemas.read_sweep(tmp_path / "absent.csv")


def test_wrong_header_refused(tmp_path):
    p = tmp_path / "sweep.csv"
    p.write_text("a,b,c\n1,2,3\n", encoding="utf-8")
    with pytest.raises(schemas.SchemaError, match="unexpected header"):
        schemas.read_sweep(p)
    with pytest.raises(schemas.SchemaError, match="unexpected header"):
        schemas.read_trajectory(p)


def test_sweep_reader_reassembles_grid(tmp_path):
    p = tmp_path / "sweep.csv"
    p.write_text(
        "tau_bar,tau_a,verdict,final_norm\n"
        "0.0,0.4,Unstable,1e7\n"
        "0.0,2.0,Stable,0.001\n"
        "0.1,0.4,Unstable,1e7\n"
        "0.1,2.0,Inconclusive,0.5\n",
        encoding="utf-8",
    )
    sweep = schemas.read_sweep(p)
    assert list(sweep.tau_a) == [0.4, 2.0]
    assert list(sweep.tau_bar) == [0.0, 0.1]
    assert sweep.codes.tolist() == [[2, 2], [0, 1]]


def test_sweep_reader_rejects_incomplete_grid(tmp_path):
    p = tmp_path / "sweep.csv"
    p.write_text(
        "tau_bar,tau_a,verdict,final_norm\n"
        "0.0,0.4,Unstable,1e7\n"
        "0.1,2.0,Stable,0.001\n",
        encoding="utf-8",
    )
    with pytest.raises(schemas.SchemaError, match="not complete"):
        schemas.read_sweep(p)


def test_boundary_reader_handles_undefined(tmp_path):
    p = tmp_path / "boundary.csv"
    p.write_text("tau_bar,tau_a_boundary\n0.0,1.4\n0.1,\n", encoding="utf-8")
    b = schemas.read_boundary(p)
    assert b.tau_a[0] == 1.4
    assert np.isnan(b.tau_a[1])


def test_trajectory_reader_shapes(tmp_path):
    p = tmp_path / "trajectory.csv"
    p.write_text(
        "t,x1,x2,norm_x,theta1,sigma,c\n"
        "0.0,1.0,-1.0,1.4142135623730951,0.0,1,1\n"
        "0.001,0.99,-0.99,1.4000714267493641,0.001,2,1\n",
        encoding="utf-8",
    )
    traj = schemas.read_trajectory(p)
    assert traj.x.shape == (2, 2)
    assert traj.theta.shape == (2, 1)
    assert traj.sigma.tolist() == [1, 2]


def test_budget_reader_and_exceedance(tmp_path):
    header = schemas.BUDGET_HEADER
    stable = tmp_path / "stable.csv"
    stable.write_text(
        f"{header}\n"
        "0.0,0.12,0.0,0.075,0.197,0.0,0.217,0.414\n"
        "1.0,0.12,0.0,0.075,0.197,0.0,0.217,0.414\n",
        encoding="utf-8",
    )
    b = schemas.read_budget(stable)
    assert np.allclose(b.gamma, 0.609)
    assert not schemas.exceedance_mask(b).any()

    unstable = tmp_path / "unstable.csv"
    unstable.write_text(
        f"{header}\n"
        "0.0,2.8,0.0,0.5,1.971,0.0,-4.662,-2.691\n",
        encoding="utf-8",
    )
    bu = schemas.read_budget(unstable)
    assert schemas.exceedance_mask(bu).all()
