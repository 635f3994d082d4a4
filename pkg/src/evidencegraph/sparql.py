"""Knowledge-base SPARQL client with one query per entity and a record/replay cache.

Query construction inlines the whole property set as a VALUES block so a
single request covers every property of interest for an entity.  The client
runs in three modes:

* live    - execute against the endpoint, nothing persisted
* record  - execute and persist each raw response under a content hash
* replay  - serve responses bit-identically from the cache, never touching
            the network

Cache files live at ``cache_dir/<sha256>.json`` where the hash covers the
entity id and the sorted property list.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import CacheMissError, ResponseParseError, TransportError
from .graph import EntityRef, Origin, Statement
from .text import label_tokens

logger = logging.getLogger(__name__)

WIKIDATA_ENTITY_PREFIX = "http://www.wikidata.org/entity/"
WIKIDATA_PROPERTY_PREFIX = "http://www.wikidata.org/prop/direct/"

_QUERY_TEMPLATE = """PREFIX wd: <http://www.wikidata.org/entity/>
PREFIX wdt: <http://www.wikidata.org/prop/direct/>
PREFIX wikibase: <http://wikiba.se/ontology#>
PREFIX bd: <http://www.bigdata.com/rdf#>
SELECT ?p ?o ?oLabel WHERE {{
  VALUES ?p {{ {values} }}
  wd:{entity} ?p ?o .
  SERVICE wikibase:label {{ bd:serviceParam wikibase:language "en" . }}
}}
LIMIT {limit}"""


class ClientMode(str, Enum):
    LIVE = "live"
    RECORD = "record"
    REPLAY = "replay"


@dataclass
class SparqlEndpointConfig:
    endpoint: str = "https://query.wikidata.org/sparql"
    timeout_s: float = 30.0
    min_delay_ms: int = 200
    user_agent: str = "evidencegraph/0.1 (offline-capable research client)"
    cache_dir: Optional[Path] = None
    mode: ClientMode = ClientMode.REPLAY
    result_limit: int = 500
    max_retries: int = 3


@dataclass
class EntityNeighborhood:
    entity: EntityRef
    statements: list[Statement]
    object_labels: dict[str, str] = field(default_factory=dict)


def build_entity_query(entity_id: str, properties: Sequence[str], limit: int = 500) -> str:
    """Deterministic single-query text covering all requested properties."""
    if not properties:
        raise ValueError("property list must be nonempty")
    unique = sorted(set(properties))
    values = " ".join(f"wdt:{p}" for p in unique)
    return _QUERY_TEMPLATE.format(values=values, entity=entity_id, limit=limit)


def cache_key(entity_id: str, properties: Sequence[str]) -> str:
    payload = json.dumps({"entity": entity_id, "properties": sorted(set(properties))})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def http_transport(config: SparqlEndpointConfig) -> Callable[[str], dict]:
    """Default transport: POST to the configured endpoint, expect SPARQL JSON."""
    import requests

    def execute(query: str) -> dict:
        try:
            resp = requests.post(
                config.endpoint,
                data={"query": query},
                headers={
                    "Accept": "application/sparql-results+json",
                    "User-Agent": config.user_agent,
                },
                timeout=config.timeout_s,
            )
            resp.raise_for_status()
            return resp.json()
        except Exception as exc:  # requests/network/JSON failures all map the same way
            raise TransportError(str(exc)) from exc

    return execute


def failing_transport(_query: str) -> dict:
    """Transport that must never be reached; used to prove replay is offline."""
    raise AssertionError("network transport invoked in replay mode")


class SparqlClient:
    """Serializes outbound requests and honors the per-request delay.

    ``transport_calls`` counts actual transport invocations (zero in replay);
    pipeline-level query accounting lives in the traversal statistics.
    """

    def __init__(
        self,
        config: SparqlEndpointConfig,
        transport: Optional[Callable[[str], dict]] = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.config = config
        self._transport = transport if transport is not None else http_transport(config)
        self._sleep = sleep
        self._clock = clock
        self._lock = threading.Lock()
        self._last_request_at: Optional[float] = None
        self.transport_calls = 0
        if config.mode is not ClientMode.LIVE and config.cache_dir is None:
            raise ValueError(f"{config.mode.value} mode requires a cache_dir")
        if config.cache_dir is not None:
            Path(config.cache_dir).mkdir(parents=True, exist_ok=True)

    # ------------------------------------------------------------------
    def query_entity(
        self, entity_id: str, properties: Sequence[str], limit: Optional[int] = None
    ) -> EntityNeighborhood:
        """Fetch (or replay) the outgoing statements of one entity."""
        limit = limit if limit is not None else self.config.result_limit
        query = build_entity_query(entity_id, properties, limit)
        key = cache_key(entity_id, properties)
        if self.config.mode is ClientMode.REPLAY:
            raw = self._read_cache(key, entity_id)
        elif self.config.mode is ClientMode.RECORD and self._cache_path(key).exists():
            # record-once: an existing entry is served, not re-fetched
            raw = self._read_cache(key, entity_id)
        else:
            raw = self._execute_with_retry(query)
            if self.config.mode is ClientMode.RECORD:
                self._write_cache(key, entity_id, properties, query, limit, raw)
        return parse_neighborhood(entity_id, set(properties), raw)

    # ------------------------------------------------------------------
    def _execute_with_retry(self, query: str) -> dict:
        last_error: Optional[Exception] = None
        for attempt in range(self.config.max_retries):
            with self._lock:
                self._respect_delay()
                self.transport_calls += 1
                self._last_request_at = self._clock()
                try:
                    return self._transport(query)
                except TransportError as exc:
                    last_error = exc
                    logger.warning("request failed (attempt %d): %s", attempt + 1, exc)
        raise TransportError(f"giving up after {self.config.max_retries} attempts: {last_error}")

    def _respect_delay(self) -> None:
        if self._last_request_at is None:
            return
        elapsed = self._clock() - self._last_request_at
        wait = self.config.min_delay_ms / 1000.0 - elapsed
        if wait > 0:
            self._sleep(wait)

    def _cache_path(self, key: str) -> Path:
        return Path(self.config.cache_dir) / f"{key}.json"

    def _read_cache(self, key: str, entity_id: str) -> dict:
        path = self._cache_path(key)
        if not path.exists():
            raise CacheMissError(f"no recorded response for entity {entity_id} (key {key})")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["response"]

    def _write_cache(self, key, entity_id, properties, query, limit, raw) -> None:
        record = {
            "request": {
                "entity_id": entity_id,
                "properties": sorted(set(properties)),
                "limit": limit,
                "query": query,
            },
            "response": raw,
            "fetched_at": datetime.now(timezone.utc).isoformat(),
        }
        with open(self._cache_path(key), "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)


_ENTITY_URI_RE = re.compile(re.escape(WIKIDATA_ENTITY_PREFIX) + r"(.+)$")
_PROPERTY_URI_RE = re.compile(re.escape(WIKIDATA_PROPERTY_PREFIX) + r"(.+)$")


def parse_neighborhood(entity_id: str, requested: set[str], raw: dict) -> EntityNeighborhood:
    """Turn a SPARQL JSON result into statements with object labels.

    Only entity-valued objects become statements; literal objects (dates,
    quantities, strings) carry no graph node and are skipped.  Statements are
    sorted by (predicate, object) so downstream traversal sees a canonical
    order regardless of endpoint whims.
    """
    try:
        bindings = raw["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise ResponseParseError(f"malformed result document for {entity_id}") from exc

    statements: list[Statement] = []
    labels: dict[str, str] = {}
    seen: set[tuple[str, str]] = set()
    for b in bindings:
        try:
            p_value = b["p"]["value"]
            o_entry = b["o"]
            o_value = o_entry["value"]
        except (KeyError, TypeError) as exc:
            raise ResponseParseError(f"malformed binding for {entity_id}") from exc
        p_match = _PROPERTY_URI_RE.match(p_value)
        o_match = _ENTITY_URI_RE.match(o_value) if o_entry.get("type") == "uri" else None
        if p_match is None or o_match is None:
            continue
        pid, oid = p_match.group(1), o_match.group(1)
        if pid not in requested:
            continue
        if (pid, oid) in seen:
            continue
        seen.add((pid, oid))
        statements.append(Statement(entity_id, pid, oid))
        label = b.get("oLabel", {}).get("value")
        if label:
            labels[oid] = label
    statements.sort(key=lambda s: (s.predicate, s.object))
    entity = EntityRef(
        id=entity_id,
        label=entity_id,
        tokens=tuple(label_tokens(entity_id)),
        origin=Origin.STRUCTURED,
    )
    return EntityNeighborhood(entity=entity, statements=statements, object_labels=labels)
