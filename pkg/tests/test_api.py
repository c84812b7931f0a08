import io
import socket
import threading
import time

import pytest
import uvicorn
from fastapi.testclient import TestClient

from acas.api import create_app
from acas.mtourism.runtime import DemoRuntime, data_path
from acas.mtourism.scenario import HttpBackend, execute, parse_script, run_scenario

SERVICE = "RestaurantsSearching"


@pytest.fixture
def client():
    return TestClient(create_app(DemoRuntime.from_files()))


def test_health_and_plain_call(client):
    assert client.get("/health").json() == {"status": "ok", "services": [SERVICE]}
    body = client.post(f"/services/{SERVICE}/search", json={"pageSize": 3}).json()
    assert len(body["response"]["items"]) == 3 and body["mode"] == "sync" and body["selected"] == []


def test_context_drives_adaptation(client):
    assert client.put("/context/device.hardware.battery.level", json={"value": 10}).json() == {
        "path": "device.hardware.battery.level", "provider": "DeviceProvider"}
    body = client.post(f"/services/{SERVICE}/search", params={"mode": "async"}, json={}).json()
    assert body["response"]["optimized"] is True and body["selected"] == ["BatteryStateAS"]
    again = client.post(f"/services/{SERVICE}/search", params={"mode": "async"}, json={}).json()
    assert again["cacheHit"] is True
    assert client.get("/stats").json()["hits"] == 1
    client.delete("/context/device.hardware.battery.level")
    snap = client.get(f"/services/{SERVICE}/snapshot").json()
    assert "device.hardware.battery.level" not in snap["entries"]


def test_snapshot_view(client):
    client.put("/context/user.language", json={"value": "fr"})
    client.put("/context/environment.weather", json={"value": "rain"})
    snap = client.get(f"/services/{SERVICE}/snapshot").json()
    assert snap["entries"]["user.language"]["value"] == "fr"
    assert snap["entries"]["environment.weather"]["source"] == "WeatherProvider"
    assert len(snap["digest"]) == 64


def test_error_mapping(client):
    assert client.post("/services/Nope/search", json={}).status_code == 404
    assert client.post(f"/services/{SERVICE}/book", json={}).status_code == 404
    assert client.put("/context/user.shoeSize", json={"value": 1}).status_code == 404
    assert client.put("/context/device.hardware.battery.level", json={"value": "x"}).status_code == 422
    assert client.post(f"/services/{SERVICE}/search", json={"page": 0}).status_code == 422
    assert client.put(f"/strategies/{SERVICE}", content=b"<cas").status_code == 400
    assert client.put("/strategies/Other", content=data_path("empty-cas.xml").read_bytes()).status_code == 400
    assert client.put("/data/restaurants", json=[{"id": "x"}]).status_code == 422


def test_strategies_round_trip_over_http(client):
    shipped = data_path("restaurants-cas.xml").read_bytes()
    assert client.get(f"/strategies/{SERVICE}").content == shipped
    ack = client.put(f"/strategies/{SERVICE}", content=data_path("empty-cas.xml").read_bytes()).json()
    assert ack == {"service": SERVICE, "strategies": []}


def test_http_backend_over_test_client(client):
    backend = HttpBackend("http://testserver", client=client)
    import json
    backend.upload(data_path("restaurants-cas.xml").read_bytes(),
                   json.loads(data_path("restaurants.json").read_text(encoding="utf-8")))
    script = data_path("scenarios/scenario-full.txt").read_text(encoding="utf-8")
    result = execute(parse_script(script), backend, trace=True)
    assert result.exit_code == 0, result.transcript


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_cli_thin_client_against_live_server():
    port = _free_port()
    server = uvicorn.Server(uvicorn.Config(create_app(DemoRuntime.from_files()), host="127.0.0.1", port=port,
                                           log_level="warning"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        for _ in range(100):
            if server.started:
                break
            time.sleep(0.05)
        script = data_path("scenarios/scenario-optimization.txt")
        local, remote = io.StringIO(), io.StringIO()
        cas, data = data_path("restaurants-cas.xml"), data_path("restaurants.json")
        assert run_scenario(script, cas, data, trace=True, out=local) == 0
        assert run_scenario(script, cas, data, trace=True, out=remote, server=f"http://127.0.0.1:{port}") == 0
        assert local.getvalue() == remote.getvalue()
    finally:
        server.should_exit = True
        thread.join(5)
