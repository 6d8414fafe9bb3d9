import numpy as np
import pytest

from bpradon import textio
from bpradon.bandpass import BandSpec, Parity, RadialSpectrum
from bpradon.config import ConfigError, ExperimentConfig, config_to_text, load_config, parse_config
from bpradon.grids import AngularGrid, make_jittered_grid


def test_fmt_round_trip():
    for x in (0.1, 1 / 3, -2.5e-9, 123456.789, 0.0):
        assert float(textio.fmt(x)) == x
    assert "e" not in textio.fmt(1e-12)


def test_complex_format():
    assert textio.fmt_complex(1 + 2j) == "1+2j"
    assert textio.fmt_complex(0.5 - 0.25j) == "0.5-0.25j"
    assert complex(textio.fmt_complex(-1.5 + 0j)) == -1.5


def test_parse_kv():
    kv = textio.parse_kv("# header\na = 1\n\nb=x=y  # trailing\n")
    assert kv == {"a": "1", "b": "x=y"}
    with pytest.raises(ValueError):
        textio.parse_kv("novalue\n")


def test_radial_angular_files(tmp_path):
    g = make_jittered_grid(0.7, 0.3, 10.0, 2)
    textio.write_radial(tmp_path / "r.csv", g)
    assert textio.read_radial(tmp_path / "r.csv") == g
    a = AngularGrid([2.0, 0.1, 1.0])
    textio.write_angular(tmp_path / "a.csv", a)
    np.testing.assert_array_equal(textio.read_angular(tmp_path / "a.csv").angles, [0.1, 1.0, 2.0])


def test_spectrum_text():
    spec = RadialSpectrum(BandSpec(1.0, 2.0, "radians"), Parity.ODD, (0.5j, 1.0, -2.0))
    kv = textio.parse_kv(textio.spectrum_to_text(spec, "h1."))
    assert textio.spectrum_from_kv(kv, "h1.") == spec


def test_pgm(tmp_path):
    r = np.arange(12, dtype=float).reshape(3, 4)
    lo, hi = textio.write_pgm(str(tmp_path / "x.pgm"), r)
    assert (lo, hi) == (0.0, 11.0)
    back = textio.read_pgm(str(tmp_path / "x.pgm"))
    np.testing.assert_allclose(back * 11, r, atol=11 / 255)
    meta = textio.parse_kv((tmp_path / "x.meta").read_text())
    assert meta == {"min": "0", "max": "11", "width": "4", "height": "3"}
    with open(tmp_path / "x.pgm", "rb") as fh:
        assert fh.read(2) == b"P5"


def test_pgm_constant(tmp_path):
    textio.write_pgm(str(tmp_path / "c.pgm"), np.full((2, 2), 3.0))
    assert not np.any(textio.read_pgm(str(tmp_path / "c.pgm")))


def test_raster_csv(tmp_path):
    textio.write_raster_csv(tmp_path / "v.csv", [0.0, 1.0], [2.0], np.array([[5.0, 6.0]]))
    assert (tmp_path / "v.csv").read_text() == "x,y,value\n0,2,5\n1,2,6\n"


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.band == BandSpec(1.0, 2.0, "radians")
        assert cfg.degree == 2

    def test_parse(self, tmp_path):
        (tmp_path / "grid.csv").write_text("-1\n1\n")
        cfg = parse_config("band.r_lo=0.5\nband.r_hi=3\ngrid.radial.kind=file\ngrid.radial.file=grid.csv\n"
                           "recon.ridge=none\nraster.enabled=false\ndegree=1\n", str(tmp_path))
        assert cfg.band_r_lo == 0.5 and cfg.degree == 1
        assert cfg.radial_file == str(tmp_path / "grid.csv")
        assert cfg.recon_ridge is None and cfg.raster_enabled is False

    @pytest.mark.parametrize("text", ["bogus.key=1\n", "degree=two\n", "band.r_lo=3\n", "noise.sd=-1\n",
                                      "grid.radial.kind=file\n", "grid.radial.kind=file\ngrid.radial.file=missing.csv\n",
                                      "recon.cg_tol=0.5\n", "not a line\n", "band.units=hertz\n"])
    def test_rejects(self, text, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(text, str(tmp_path))

    def test_round_trip(self):
        cfg = ExperimentConfig(degree=3, noise_sd=0.01)
        assert parse_config(config_to_text(cfg)) == cfg

    def test_seed_fallback(self):
        cfg = ExperimentConfig(seed=5, model_seed=9)
        assert cfg.seed_for("model") == 9
        assert cfg.seed_for("noise") == 5

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "nope.cfg"))
