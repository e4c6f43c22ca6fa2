"""HTTP transport for the external-scorer wire protocol.

POST /score with {"doc_id", "text", "candidates"}; the scorer answers with
{"doc_id", "probabilities"}. Response validation lives in segmenters so the
same checks apply to any transport.
"""

import requests

from .errors import ScorerResponseError, ScorerTransportError


class HttpScorer:
    """Scorer reachable over HTTP. Usable directly by ExternalSegmenter."""

    def __init__(self, endpoint, timeout=30.0):
        if not endpoint.rstrip("/").endswith("/score"):
            endpoint = endpoint.rstrip("/") + "/score"
        self.endpoint = endpoint
        self.timeout = timeout

    def score(self, request):
        try:
            resp = requests.post(self.endpoint, json=request, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ScorerTransportError(f"scorer unreachable: {exc}") from exc
        try:
            body = resp.json()
        except ValueError as exc:
            raise ScorerResponseError(
                f"non-JSON response (HTTP {resp.status_code})"
            ) from exc
        return body
