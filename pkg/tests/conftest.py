import pytest

from faithlab import catalog, config


@pytest.fixture(autouse=True)
def default_config(monkeypatch, tmp_path):
    """Every test sees built-in defaults and an empty home directory."""
    monkeypatch.delenv(config.MAX_VERTICES_ENV, raising=False)
    monkeypatch.setattr(config, "HOME_PATH", str(tmp_path / "home"))
    monkeypatch.setattr(config, "CONFIG_FILE", str(tmp_path / "home" / "config.json"))
    monkeypatch.setattr(config, "GRAPHS_FILE", str(tmp_path / "home" / "graphs.json"))
    monkeypatch.setattr(config, "config", {})
    monkeypatch.setattr(catalog, "catalog", None)
    yield
