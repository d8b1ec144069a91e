"""HTTP provider adapters exercised against an in-process mock transport."""
from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import httpx
import pytest

from timeaudit.backends.http import (
    ChatCompletionsLM,
    HTTPSearchClient,
    ProviderConfig,
    load_provider_config,
)
from timeaudit.backends.llm import LMRequest, ToolSchema
from timeaudit.backends.search import SearchRequest
from timeaudit.errors import ConfigError, RateLimit, TransportError

LM_CONFIG = ProviderConfig(endpoint="https://lm.example/v1/chat", model="m-1")


def lm_request(**kw):
    return LMRequest(system="sys", user="usr", **kw)


def chat_body(content=None, tool_calls=None):
    message = {}
    if content is not None:
        message["content"] = content
    if tool_calls is not None:
        message["tool_calls"] = tool_calls
    return {"choices": [{"message": message}]}


def test_resolved_headers_reads_credential_from_env():
    config = ProviderConfig(endpoint="e", api_key_env="TA_KEY")
    headers = config.resolved_headers({"TA_KEY": "sekrit"})
    assert headers["authorization"] == "Bearer sekrit"
    assert headers["content-type"] == "application/json"
    with pytest.raises(ConfigError):
        config.resolved_headers({})


def test_resolved_headers_without_credential_requirement():
    headers = ProviderConfig(endpoint="e").resolved_headers({})
    assert "authorization" not in headers


def test_load_provider_config_with_env_overrides(tmp_path: Path):
    path = tmp_path / "providers.json"
    path.write_text(json.dumps({
        "lm": {"endpoint": "https://file.example", "model": "file-model",
               "timeout_s": 12, "headers": {"x-extra": "1"}},
    }))
    config = load_provider_config(path, "lm", env={})
    assert config.endpoint == "https://file.example"
    assert config.timeout_s == 12.0
    overridden = load_provider_config(
        path, "lm", env={"TIMEAUDIT_LM_ENDPOINT": "https://env.example",
                         "TIMEAUDIT_LM_MODEL": "env-model"}
    )
    assert overridden.endpoint == "https://env.example"
    assert overridden.model == "env-model"
    assert overridden.headers == {"x-extra": "1"}


def test_load_provider_config_errors(tmp_path: Path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ConfigError):
        load_provider_config(missing, "lm", env={})
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"other": {}}))
    with pytest.raises(ConfigError):
        load_provider_config(path, "lm", env={})
    path.write_text(json.dumps({"lm": {"model": "no endpoint"}}))
    with pytest.raises(ConfigError):
        load_provider_config(path, "lm", env={})


def test_chat_lm_text_round_trip():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["payload"] = json.loads(request.content)
        return httpx.Response(200, json=chat_body(content="hello"))

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(handler))
    response = lm.complete(lm_request(temperature=0.3, max_tokens=123))
    assert response.text == "hello"
    payload = seen["payload"]
    assert payload["model"] == "m-1"
    assert payload["temperature"] == 0.3
    assert payload["max_tokens"] == 123
    assert payload["messages"][0] == {"role": "system", "content": "sys"}


def test_chat_lm_structured_mode_flags_json():
    def handler(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content)
        assert payload["response_format"] == {"type": "json_object"}
        return httpx.Response(200, json=chat_body(content='{"n": 1}'))

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(handler))
    response = lm.complete(lm_request(response_schema={"type": "object"}))
    assert response.text == '{"n": 1}'


def test_chat_lm_tool_call_parsing():
    tool = ToolSchema("search", "find docs", {"type": "object"})

    def handler(request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content)
        assert payload["tools"][0]["function"]["name"] == "search"
        return httpx.Response(200, json=chat_body(tool_calls=[
            {"function": {"name": "search", "arguments": '{"query": "x"}'}}
        ]))

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(handler))
    response = lm.complete(lm_request(tools=(tool,)))
    assert response.tool_call.name == "search"
    assert response.tool_call.arguments == {"query": "x"}


def test_chat_lm_error_mapping():
    def limited(request):
        return httpx.Response(429, json={})

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(limited))
    with pytest.raises(RateLimit):
        lm.complete(lm_request())

    def server_error(request):
        return httpx.Response(500, text="boom")

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(server_error))
    with pytest.raises(TransportError):
        lm.complete(lm_request())

    def malformed(request):
        return httpx.Response(200, json={"choices": []})

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(malformed))
    with pytest.raises(TransportError):
        lm.complete(lm_request())

    def network_failure(request):
        raise httpx.ConnectError("down")

    lm = ChatCompletionsLM(LM_CONFIG, transport=httpx.MockTransport(network_failure))
    with pytest.raises(TransportError):
        lm.complete(lm_request())


SEARCH_CONFIG = ProviderConfig(endpoint="https://search.example/api")


def test_http_search_parses_results_and_params():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["params"] = dict(request.url.params)
        return httpx.Response(200, json={"results": [
            {"url": "https://a", "title": "A", "snippet": "sa",
             "publication_date": "2018-03-01"},
            {"url": "https://b", "title": "B", "snippet": "sb",
             "publication_date": None},
        ]})

    client = HTTPSearchClient(SEARCH_CONFIG, transport=httpx.MockTransport(handler))
    out = client.search(SearchRequest("quake", before_date=dt.date(2019, 1, 15),
                                      max_results=4))
    assert seen["params"] == {"q": "quake", "limit": "4", "before": "2019-01-15"}
    assert out[0].publication_date == dt.date(2018, 3, 1)
    assert out[1].publication_date is None


def test_http_search_error_mapping():
    client = HTTPSearchClient(
        SEARCH_CONFIG, transport=httpx.MockTransport(lambda r: httpx.Response(429))
    )
    with pytest.raises(RateLimit):
        client.search(SearchRequest("q"))
    client = HTTPSearchClient(
        SEARCH_CONFIG, transport=httpx.MockTransport(lambda r: httpx.Response(403))
    )
    with pytest.raises(TransportError):
        client.search(SearchRequest("q"))
