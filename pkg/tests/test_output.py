import numpy as np

from abiot_sim.output import atomic_write_text, csv_text, exposure_pgm, plan_csv, read_pgm


def test_atomic_write_leaves_no_temp(tmp_path):
    p = atomic_write_text(tmp_path / "sub" / "x.txt", "hello\n")
    assert p.read_text() == "hello\n"
    assert [f.name for f in p.parent.iterdir()] == ["x.txt"]


def test_pgm_round_trip_orientation(tmp_path):
    dose = np.zeros((3, 4))
    dose[0, 1] = 2.0   # low y
    dose[2, 3] = 1.0   # high y
    text = exposure_pgm(dose)
    lines = text.splitlines()
    assert lines[:3] == ["P2", "4 3", "65535"]
    assert lines[3].split() == ["0", "0", "0", "32768"]  # first row is the far edge
    atomic_write_text(tmp_path / "e.pgm", text)
    back = read_pgm(tmp_path / "e.pgm")
    assert back[0, 1] == 65535 and back[2, 3] == 32768


def test_pgm_all_zero():
    assert exposure_pgm(np.zeros((2, 2))).splitlines()[3] == "0 0"


def test_plan_and_csv():
    text = plan_csv([[(0, 0), (1.5, 0)], [(0, 0), (1.5, 0)]])
    assert text.splitlines() == ["lap,seq,x_m,y_m", "1,0,0.000000,0.000000", "1,1,1.500000,0.000000",
                                 "2,0,0.000000,0.000000", "2,1,1.500000,0.000000"]
    assert csv_text(["a"], [[1], [2]]) == "a\n1\n2\n"
