def test_stats(client):
    response = client.get("/api/stats")
    assert response.status_code == 200
    assert response.json["commands"] == ["eval", "verify", "invert", "audit", "sample"]
    assert "tolerances" in response.json["config"]


def test_eval(client):
    response = client.post("/api/eval", json={"fixture": "flat-real", "eta": [[1, 0], [0, 0]]})
    assert response.status_code == 200
    record = response.json["points"][0]
    assert record["alpha"] == 1.0
    assert record["g"][0][0] == [16.0, 0.0]


def test_domain_error_is_422(client):
    response = client.post("/api/eval", json={"fixture": "flat-real", "b": "1,0", "eta": "1,0"})
    assert response.status_code == 422
    assert response.json["exit_code"] == 2


def test_invert_hermitian_metric(client):
    response = client.post("/api/invert", json={"fixture": "c3-example", "eta": "1,1,1"})
    assert response.status_code == 422
    assert response.json["error"] == "NotNonHermitian"


def test_sample_grid(client):
    response = client.post("/api/sample", json={"fixture": "c3-example", "grid": 2})
    assert response.status_code == 200
    assert response.json["summary"]["points"] == 8


def test_audit(client):
    response = client.post("/api/audit", json={"fixture": "flat-real", "samples": 10})
    assert response.status_code == 200
    assert len(response.json["findings"]) == 14


def test_invalid_body(client):
    response = client.post("/api/eval", data="not json", content_type="text/plain")
    assert response.status_code == 400


def test_invalid_fields(client):
    response = client.post("/api/eval", json={"fixture": "nope", "samples": -1})
    assert response.status_code == 400
    assert len(response.json["errors"]) == 2


def test_missing_points(client):
    response = client.post("/api/eval", json={"fixture": "flat-real"})
    assert response.status_code == 400


def test_file_inputs_are_refused(client):
    response = client.post("/api/eval", json={"metric": "/etc/metric.json"})
    assert response.status_code == 400
    assert "command line" in response.json["message"]


def test_unknown_route(client):
    assert client.get("/api/plot").status_code == 404


def test_wrong_method(client):
    assert client.get("/api/eval").status_code == 405
