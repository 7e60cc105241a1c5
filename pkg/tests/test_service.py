import json
import threading
import urllib.error
import urllib.request

import pytest

from siot_discovery.app.archive import load_archive
from siot_discovery.app.cli import main
from siot_discovery.app.service import make_server

PARAMS = {
    "n_devices": 120,
    "n_owners": 60,
    "clusters": [
        {"center": [0.2, 0.2], "radius": 0.12, "share": 0.34},
        {"center": [0.8, 0.3], "radius": 0.12, "share": 0.33},
        {"center": [0.5, 0.8], "radius": 0.12, "share": 0.33},
    ],
    "ws_k": 4,
    "ws_p": 0.1,
    "seed": 3,
}


@pytest.fixture(scope="module")
def served(tmp_path_factory):
    out = tmp_path_factory.mktemp("svc")
    (out / "params.json").write_text(json.dumps(PARAMS))
    assert main(["generate", "--params", str(out / "params.json"),
                 "--out", str(out / "data")]) == 0
    archive_path = out / "index.json"
    assert main([
        "build", "--devices", str(out / "data" / "devices.csv"),
        "--owners", str(out / "data" / "owners.csv"),
        "--seed", "1", "--out", str(archive_path),
    ]) == 0
    server = make_server(str(archive_path), "127.0.0.1:0")
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield archive_path, server.server_address[1]
    server.shutdown()
    server.server_close()


def http(port, path, body=None):
    url = f"http://127.0.0.1:{port}{path}"
    if body is None:
        request = urllib.request.Request(url)
    else:
        request = urllib.request.Request(
            url,
            data=json.dumps(body).encode("utf-8"),
            method="POST",
            headers={"Content-Type": "application/json"},
        )
    try:
        with urllib.request.urlopen(request) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as error:
        return error.code, json.loads(error.read())


DISCOVER_BODY = {
    "text": "What is the humidity level near the beach?",
    "requester_id": 3,
    "position": {"x": 0.2, "y": 0.2},
    "trust": "any",
}


class TestService:
    def test_healthz(self, served):
        _, port = served
        assert http(port, "/healthz") == (200, {"status": "ok"})

    def test_discover_matches_cli_query(self, served, capsys):
        archive_path, port = served
        status, payload = http(port, "/discover", DISCOVER_BODY)
        assert status == 200
        code = main([
            "query", "--archive", str(archive_path),
            "--text", DISCOVER_BODY["text"],
            "--requester", "3", "--pos", "0.2,0.2", "--trust", "any",
        ])
        assert code == 0
        cli_payload = json.loads(capsys.readouterr().out)
        assert payload == cli_payload

    def test_empty_text_is_400(self, served):
        _, port = served
        status, payload = http(port, "/discover", dict(DISCOVER_BODY, text=""))
        assert status == 400

    def test_unknown_application_is_422_with_scores(self, served):
        _, port = served
        status, payload = http(
            port, "/discover", dict(DISCOVER_BODY, text="purple elephant dancing")
        )
        assert status == 422
        assert set(payload["scores"]) == {"Weather", "Transportation", "Computation"}

    def test_malformed_json_is_400(self, served):
        _, port = served
        request = urllib.request.Request(
            f"http://127.0.0.1:{port}/discover", data=b"{nope", method="POST"
        )
        with pytest.raises(urllib.error.HTTPError) as info:
            urllib.request.urlopen(request)
        assert info.value.code == 400

    def test_missing_field_is_400(self, served):
        _, port = served
        body = {"text": "rain downtown", "position": {"x": 0.1, "y": 0.1}}
        status, _ = http(port, "/discover", body)
        assert status == 400

    def test_bad_trust_level_is_400(self, served):
        _, port = served
        status, _ = http(port, "/discover", dict(DISCOVER_BODY, trust="fof:1"))
        assert status == 400

    def test_unknown_requester_is_400(self, served):
        _, port = served
        body = dict(DISCOVER_BODY, requester_id=99999, trust="friend")
        status, payload = http(port, "/discover", body)
        assert status == 400
        assert "owns no devices" in payload["error"]

    def test_histogram_matches_archive_stats(self, served):
        archive_path, port = served
        archive = load_archive(archive_path)
        for relation in ("clor", "sfor", "sor"):
            status, payload = http(port, f"/communities/{relation}")
            assert status == 200
            assert payload["histogram"] == [
                [label, count] for label, count in archive.stats["histograms"][relation]
            ]

    def test_unknown_relation_404(self, served):
        _, port = served
        status, _ = http(port, "/communities/bogus")
        assert status == 404

    def test_concurrent_requests(self, served):
        _, port = served
        results = []
        errors = []

        def worker():
            try:
                results.append(http(port, "/discover", DISCOVER_BODY))
            except Exception as exc:  # noqa: BLE001 - collected for assertion
                errors.append(exc)

        threads = [threading.Thread(target=worker) for _ in range(12)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert len({json.dumps(payload, sort_keys=True) for _, payload in results}) == 1
