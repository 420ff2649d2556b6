"""In-process chat-completion endpoint for closed-loop testing.

The ``oracle`` mode parses the rendered prompt (either language), applies
the requested pattern/affixes with the templatic machinery, and answers
with the target embedded in filler text, which exercises lenient matching
end to end.  Other modes: ``root_echo`` answers with the query root (or
the unaffixed base form for affix prompts, a model that ignores the
requested transformation), ``constant`` with a fixed string, and
``server_error`` with HTTP 500.  A
``fail_429`` budget and ``require_auth`` compose with any mode.
"""

from __future__ import annotations

import json
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .templatic import Root, apply_pattern, attach_affixes, compile_pattern

MODES = ("oracle", "root_echo", "constant", "server_error")

_ROOT_PATTERN_QUERY = (
    re.compile(r"Given the root (\S+) and the target morphological pattern (\S+),"),
    re.compile(r"إذا كان الجذر (\S+) والوزن الصرفي المطلوب (\S+)،"),
)
_AFFIX_BASE = (
    re.compile(r"Arabic Unaffixed base form (\S+)"),
    re.compile(r"الصيغة الأساسية غير الملحقة بالزوائد: (\S+)"),
)
_AFFIX_AFFIXES = (
    re.compile(r"^Affixes : (.*)$", re.MULTILINE),
    re.compile(r"^الزوائد: (.*)$", re.MULTILINE),
)


def solve_prompt(prompt: str) -> str:
    """Extract the query from a rendered prompt and compute the answer."""
    for regex in _ROOT_PATTERN_QUERY:
        match = regex.search(prompt)
        if match:
            root, template = match.groups()
            return apply_pattern(Root.from_string(root), compile_pattern(template))
    for base_re, affix_re in zip(_AFFIX_BASE, _AFFIX_AFFIXES):
        base_match = base_re.search(prompt)
        affix_match = affix_re.search(prompt)
        if base_match and affix_match:
            parts = affix_match.group(1).split(" ")
            if len(parts) != 2:
                raise ValueError(f"cannot parse affix line {affix_match.group(1)!r}")
            prefix, suffix = parts
            return attach_affixes(base_match.group(1), prefix, suffix)
    raise ValueError("prompt does not match any known task template")


def extract_echo(prompt: str) -> str:
    """The lazy answer: the query root, or the unaffixed base for affix prompts."""
    for regex in _ROOT_PATTERN_QUERY:
        match = regex.search(prompt)
        if match:
            return match.group(1)
    for regex in _AFFIX_BASE:
        match = regex.search(prompt)
        if match:
            return match.group(1)
    raise ValueError("no root or base form found in prompt")


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):  # keep test output quiet
        pass

    def do_POST(self):
        server: MockChatServer = self.server.mock  # type: ignore[attr-defined]
        length = int(self.headers.get("Content-Length", "0"))
        try:
            payload = json.loads(self.rfile.read(length))
            prompt = payload["messages"][-1]["content"]
        except (ValueError, KeyError, IndexError):
            self._reply(400, {"error": "bad request"})
            return
        with server.lock:
            server.requests.append(payload)
            fail = server.fail_429 > 0
            if fail:
                server.fail_429 -= 1
        if server.require_auth and not self.headers.get("Authorization"):
            self._reply(401, {"error": "missing credentials"})
            return
        if fail:
            self._reply(429, {"error": "rate limited"})
            return
        if server.mode == "server_error":
            self._reply(500, {"error": "boom"})
            return
        try:
            if server.mode == "oracle":
                text = f"Answer: {solve_prompt(prompt)}."
            elif server.mode == "root_echo":
                text = f"Answer: {extract_echo(prompt)}."
            else:
                text = server.constant
        except ValueError as exc:
            self._reply(422, {"error": str(exc)})
            return
        self._reply(200, {"choices": [{"message": {"content": text}}]})

    def _reply(self, status: int, body: dict):
        data = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class MockChatServer:
    """Threaded mock endpoint; use as a context manager.

    ``server.url`` is the endpoint to point ProbeConfig at; every accepted
    request payload is recorded in ``server.requests``.
    """

    def __init__(
        self,
        mode: str = "oracle",
        constant: str = "X",
        fail_429: int = 0,
        require_auth: bool = False,
    ):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.constant = constant
        self.fail_429 = fail_429
        self.require_auth = require_auth
        self.requests: list[dict] = []
        self.lock = threading.Lock()
        self._httpd: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        assert self._httpd is not None, "server not started"
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/v1/chat/completions"

    def start(self) -> "MockChatServer":
        self._httpd = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._httpd.mock = self  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        if self._httpd is not None:
            self._httpd.shutdown()
            self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "MockChatServer":
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()
