import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amcost.geometry import PartSpec
from amcost.packer import (BuildVolume, PackingError, compute_layers, fill_order, occupancy_grid, pack_mixed,
                           pack_single)
from amcost.surrogates import box_mesh

from _checks import assert_clearance, lattice_capacity


def box_part(x, y, z, name):
    return PartSpec.from_mesh(box_mesh((x, y, z), name=name), role="reference")


def test_compute_layers():
    assert compute_layers(33.88, 0.02) == 1694
    assert compute_layers(0.0, 0.02) == 0
    assert compute_layers(0.001, 0.02) == 1
    assert compute_layers(0.021, 0.02) == 2
    with pytest.raises(ValueError):
        compute_layers(1.0, 0.0)


def test_layer_count_recovered_from_cost_table(single_rows, scenario):
    # the failure multiplier implied by the one-blower build: (C_Total - post) / C_Build
    row = single_rows[0]
    post = scenario.profile.postprocess_cost
    multiplier = (row.C_Total - post) / row.C_Build
    n = -np.log(multiplier) / np.log(1 - 0.00025)
    assert round(n) == 1694 == compute_layers(33.88, 0.02)


def test_single_one_blower(blower):
    build = pack_single(blower, 1)
    assert len(build.instances) == 1
    assert build.V_Build == pytest.approx(8.40, abs=0.005)
    assert build.mode == "single"
    assert not build.truncated


def test_single_capacity_matches_lattice_oracle(blower):
    bv = BuildVolume()
    expected = lattice_capacity(bv.x, 50.0, bv.spacing) * lattice_capacity(bv.y, 40.0, bv.spacing)
    assert expected == 20
    build = pack_single(blower, 999, bv)
    assert len(build.instances) == expected
    assert build.truncated
    # 20 x 8.403; the published 168.04 reflects a part volume of ~8.402 cm³
    assert build.V_Build == pytest.approx(168.04, abs=0.05)


def test_single_infeasible_part():
    huge = box_part(300, 10, 10, "huge")
    with pytest.raises(PackingError):
        pack_single(huge, 1)
    tall = box_part(10, 10, 300, "tall")
    with pytest.raises(PackingError):
        pack_single(tall, 1)


def test_mixed_four_blowers(blower, basket):
    build = pack_mixed([(blower, 4)], basket)
    assert build.count("blower") == 4
    assert len(build.instances) >= 8
    assert all(build.count(p.name) >= 1 for p in basket)
    assert build.mode == "mixed"


def test_mixed_thirteen_blowers_feasible(blower, basket):
    build = pack_mixed([(blower, 13)], basket)
    assert build.count("blower") == 13
    assert all(build.count(p.name) >= 1 for p in basket)


def test_mixed_without_required(basket):
    build = pack_mixed([], basket)
    assert all(build.count(p.name) >= 1 for p in basket)
    assert all(inst.part.role == "reference" for inst in build.instances)


def test_mixed_required_infeasible_names_part(blower, basket):
    with pytest.raises(PackingError, match="blower"):
        pack_mixed([(blower, 21)], basket)


def test_mixed_volume_at_least_required_plus_basket(blower, basket):
    build = pack_mixed([(blower, 6)], basket)
    floor = 6 * blower.deposited_volume + sum(p.deposited_volume for p in basket)
    assert build.V_Build >= floor
    assert build.V_Build == pytest.approx(sum(i.part.deposited_volume for i in build.instances))


def test_fill_order_by_area_then_name():
    a = box_part(20, 20, 5, "b_part")
    b = box_part(20, 20, 5, "a_part")
    c = box_part(30, 30, 5, "z_part")
    assert [p.name for p in fill_order([a, b, c])] == ["z_part", "a_part", "b_part"]


def test_height_and_layers_constant_across_mixed_sweep(blower, basket):
    layers = {pack_mixed([(blower, n)], basket).n_layers for n in (1, 5, 13)}
    assert layers == {1694}


def test_no_overlap_and_clearance(blower, basket):
    bv = BuildVolume()
    build = pack_mixed([(blower, 5)], basket, bv)
    assert occupancy_grid(build, bv).max() == 1
    assert_clearance(build, bv)


def test_volume_fractions_sum_to_one(blower, basket):
    build = pack_mixed([(blower, 3)], basket)
    assert build.volume_fractions().sum() == pytest.approx(1.0, abs=1e-12)


def test_manifest_is_deterministic(blower, basket, tmp_path):
    a = pack_mixed([(blower, 4)], basket)
    b = pack_mixed([(blower, 4)], basket)
    a.write_manifest(tmp_path / "a.json")
    b.write_manifest(tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    totals = a.manifest()["totals"]
    assert totals["n_layers"] == 1694
    assert totals["V_build_cm3"] == pytest.approx(a.V_Build)


@settings(max_examples=25, deadline=None)
@given(w=st.integers(8, 60), d=st.integers(8, 60), plate=st.integers(70, 200), extra=st.integers(1, 40),
       spacing=st.integers(0, 6), more_spacing=st.integers(1, 4))
def test_single_count_monotone(w, d, plate, extra, spacing, more_spacing):
    part = box_part(w, d, 5, "box")
    def count(px, s):
        try:
            return len(pack_single(part, 10_000, BuildVolume(px, px, 50, s)).instances)
        except PackingError:
            return 0
    base = count(plate, spacing)
    assert count(plate + extra, spacing) >= base
    assert count(plate, spacing + more_spacing) <= base
