"""Scalp-map rendering and electrode placement."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from vpgnet.core import Montage
from vpgnet.errors import ChannelMismatch
from vpgnet.topomap import electrode_position, export_topomap


class TestElectrodePosition:
    def test_midline_sits_on_axis(self):
        for name in ("Fz", "Cz", "Pz", "Oz"):
            x, _ = electrode_position(name)
            assert x == 0.0

    def test_front_back_ordering(self):
        ys = [electrode_position(n)[1] for n in ("Fp1", "F3", "C3", "P3", "O1")]
        assert ys == sorted(ys, reverse=True)

    def test_odd_left_even_right(self):
        for left, right in (("O1", "O2"), ("C3", "C4"), ("F7", "F8")):
            xl, yl = electrode_position(left)
            xr, yr = electrode_position(right)
            assert xl < 0 < xr
            assert yl == yr
            assert xl == pytest.approx(-xr)

    def test_all_positions_inside_unit_disc(self, montage8):
        for name in montage8.channel_names:
            x, y = electrode_position(name)
            assert x * x + y * y <= 1.0

    def test_unplaceable_names(self):
        with pytest.raises(ChannelMismatch):
            electrode_position("EOG")
        with pytest.raises(ChannelMismatch):
            electrode_position("X7")


class TestExport:
    def test_csv_rows(self, montage8, tmp_path):
        values = np.arange(8, dtype=float) / 10
        export_topomap(values, montage8, tmp_path / "map.svg", tmp_path / "map.csv")
        lines = (tmp_path / "map.csv").read_text().strip().splitlines()
        assert lines[0] == "channel,value"
        assert len(lines) == 9
        assert lines[1] == "Fp1,0"
        assert lines[-1] == "O2,0.7"

    def test_csv_path_defaults_next_to_svg(self, montage8, tmp_path):
        export_topomap(np.zeros(8), montage8, tmp_path / "map.svg")
        assert (tmp_path / "map.csv").exists()

    def test_svg_well_formed(self, montage8, tmp_path):
        export_topomap(np.linspace(-1, 1, 8), montage8, tmp_path / "map.svg")
        root = ET.parse(tmp_path / "map.svg").getroot()
        assert root.tag.endswith("svg")
        texts = [el.text for el in root.iter() if el.tag.endswith("text")]
        assert set(texts) == set(montage8.channel_names)

    def test_constant_values_render(self, montage8, tmp_path):
        # zero span must not divide by zero
        export_topomap(np.full(8, 2.5), montage8, tmp_path / "flat.svg")
        assert (tmp_path / "flat.svg").stat().st_size > 0

    def test_value_count_checked(self, montage8, tmp_path):
        with pytest.raises(ChannelMismatch):
            export_topomap(np.zeros(7), montage8, tmp_path / "map.svg")
