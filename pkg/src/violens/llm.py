"""Chat-completion clients for the two external LLM uses: paraphrase
augmentation and zero-shot violence annotation.

Both uses have a deterministic offline stub so the whole pipeline runs in CI
without network or keys. The HTTP client is provider-agnostic (base URL +
bearer key from an environment variable, chat-completions JSON schema).
Responses can be cached on disk keyed by prompt checksum and input hash,
which makes paid augmentation runs reproducible.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import httpx

from .records import LABEL_NONVIOLENT, LABEL_VIOLENT, ValidationError

log = logging.getLogger(__name__)

PARAPHRASE_PROMPT_VERSION = "paraphrase_v1"
ZERO_SHOT_PROMPT_VERSION = "zero_shot_violence_v1"

DEFAULT_PARAPHRASE_TEMPERATURE = 0.7  # diversity for augmentation
DEFAULT_ZERO_SHOT_TEMPERATURE = 0.0  # determinism for classification

_NUMBER_WORDS = {1: "one", 2: "two", 3: "three", 4: "four", 5: "five", 6: "six"}


class ClientError(RuntimeError):
    """Transport or provider failure that survived all retries."""


class FormatError(ValueError):
    """The model's response does not match the expected output contract."""


def load_prompt(version: str) -> str:
    return resources.files("violens.prompts").joinpath(f"{version}.txt").read_text("utf-8")


def paraphrase_prompt(k: int) -> str:
    """The versioned paraphrase system prompt; the rewrite count is the only
    part that varies with k."""
    prompt = load_prompt(PARAPHRASE_PROMPT_VERSION)
    if k != 3:
        prompt = prompt.replace("three", _NUMBER_WORDS.get(k, str(k)), 1)
    return prompt


def prompt_checksum(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


@dataclass
class ChatRequest:
    system_prompt: str
    user_text: str
    model_name: str
    temperature: float = 0.0
    max_retries: int = 3

    def __post_init__(self):
        if not self.system_prompt or not self.user_text:
            raise ValidationError("prompts must be non-empty")
        if self.temperature < 0:
            raise ValidationError("temperature must be >= 0")


@dataclass
class ZeroShotResult:
    raw_response: str
    label: str | None
    parse_ok: bool


class TokenBucket:
    """Requests-per-minute limiter shared by all threads using one client."""

    def __init__(self, rate_per_minute: float):
        self.rate = rate_per_minute / 60.0
        self.capacity = max(rate_per_minute, 1.0)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self._lock = threading.Lock()

    def acquire(self):
        while True:
            with self._lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


class HttpChatClient:
    """Minimal chat-completions client. Safe for concurrent use."""

    def __init__(
        self,
        base_url: str,
        model_name: str,
        api_key: str | None = None,
        rate_per_minute: float = 60,
        timeout: float = 60.0,
        transport: httpx.BaseTransport | None = None,
        backoff_base: float = 0.5,
    ):
        headers = {}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.model_name = model_name
        self._client = httpx.Client(
            base_url=base_url, headers=headers, timeout=timeout, transport=transport
        )
        self._bucket = TokenBucket(rate_per_minute)
        self._backoff_base = backoff_base

    def complete(self, request: ChatRequest) -> str:
        payload = {
            "model": request.model_name,
            "temperature": request.temperature,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_text},
            ],
        }
        last_error: Exception | None = None
        for attempt in range(1 + request.max_retries):
            if attempt:
                time.sleep(self._backoff_base * 2 ** (attempt - 1))
            self._bucket.acquire()
            try:
                resp = self._client.post("/chat/completions", json=payload)
                if resp.status_code == 429 or resp.status_code >= 500:
                    last_error = ClientError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                    continue
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except (httpx.TransportError, KeyError, json.JSONDecodeError) as exc:
                last_error = exc
        raise ClientError(
            f"chat completion failed after {1 + request.max_retries} attempts: {last_error}"
        )

    def close(self):
        self._client.close()


class ResponseCache:
    """Disk cache of raw responses: one JSON record per (prompt, input) pair."""

    def __init__(self, cache_dir: str | Path):
        self.dir = Path(cache_dir)
        self.dir.mkdir(parents=True, exist_ok=True)

    def _path(self, checksum: str, input_hash: str) -> Path:
        key = hashlib.sha256(f"{checksum}:{input_hash}".encode()).hexdigest()[:32]
        return self.dir / f"{key}.json"

    def get(self, checksum: str, input_hash: str) -> str | None:
        path = self._path(checksum, input_hash)
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))["response"]

    def put(self, checksum: str, input_hash: str, response: str):
        record = {"prompt_checksum": checksum, "input_hash": input_hash, "response": response}
        self._path(checksum, input_hash).write_text(
            json.dumps(record, ensure_ascii=False), "utf-8"
        )


def _input_hash(text: str, extra: str = "") -> str:
    return hashlib.sha256(f"{text}\x00{extra}".encode("utf-8")).hexdigest()[:32]


_LINE_PREFIX = re.compile(r"^\s*(?:\d+[.)]\s*|[-*•]\s*|Paraphrase\s*\d+\s*:\s*)", re.I)


def split_paraphrase_response(raw: str, k: int) -> list[str]:
    """Extract k rewrites from a numbered / bulleted / line-per-item response."""
    variants = []
    for line in raw.splitlines():
        cleaned = _LINE_PREFIX.sub("", line).strip().strip('"')
        if cleaned:
            variants.append(cleaned)
    if len(variants) < k:
        raise FormatError(f"expected {k} paraphrases, response yields {len(variants)}")
    return variants[:k]


class ParaphraseClient:
    """Paraphrase generation against a chat client, with optional caching."""

    def __init__(
        self,
        chat: HttpChatClient,
        cache_dir: str | Path | None = None,
        temperature: float = DEFAULT_PARAPHRASE_TEMPERATURE,
        max_retries: int = 3,
    ):
        self.chat = chat
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self.temperature = temperature
        self.max_retries = max_retries

    def paraphrase(self, text: str, k: int, attempt: int = 0) -> list[str]:
        if not text or not text.strip():
            raise ValidationError("cannot paraphrase empty text")
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        prompt = paraphrase_prompt(k)
        checksum = prompt_checksum(prompt)
        input_hash = _input_hash(text, f"k={k};attempt={attempt}")
        if self.cache:
            cached = self.cache.get(checksum, input_hash)
            if cached is not None:
                return split_paraphrase_response(cached, k)
        raw = self.chat.complete(
            ChatRequest(
                system_prompt=prompt,
                user_text=text,
                model_name=self.chat.model_name,
                temperature=self.temperature,
                max_retries=self.max_retries,
            )
        )
        variants = split_paraphrase_response(raw, k)  # validate before caching
        if self.cache:
            self.cache.put(checksum, input_hash, raw)
        return variants


# Deterministic offline stub: bidirectional synonym swaps plus fixed
# reporting frames, a pure function of (text, k, attempt).
_SYNONYM_PAIRS = [
    ("killed", "slew"),
    ("sword", "blade"),
    ("battle", "fight"),
    ("soldiers", "troops"),
    ("army", "host"),
    ("spear", "lance"),
    ("struck", "smote"),
    ("wounded", "hurt"),
    ("city", "town"),
    ("king", "ruler"),
    ("men", "warriors"),
    ("people", "populace"),
    ("enemy", "foe"),
    ("great", "mighty"),
    ("took", "seized"),
]
_SYNONYMS = {a: b for a, b in _SYNONYM_PAIRS} | {b: a for a, b in _SYNONYM_PAIRS}
_WORD_RE = re.compile(r"[A-Za-z]+")


def _swap_synonyms(text: str) -> str:
    def repl(m: re.Match) -> str:
        word = m.group(0)
        swapped = _SYNONYMS.get(word.lower())
        if swapped is None:
            return word
        return swapped.capitalize() if word[0].isupper() else swapped

    return _WORD_RE.sub(repl, text)


class StubParaphraser:
    """Offline paraphraser: template rewrites, bit-identical across runs."""

    frames = [
        "{swapped}",
        "It is related that {lowered}",
        "According to the chroniclers, {lowered}",
        "As the account has it, {lowered}",
        "The record states that {lowered}",
        "In another telling, {lowered}",
    ]

    def paraphrase(self, text: str, k: int, attempt: int = 0) -> list[str]:
        if not text or not text.strip():
            raise ValidationError("cannot paraphrase empty text")
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        swapped = _swap_synonyms(text)
        if swapped == text:
            swapped = f"Indeed, {text[0].lower() + text[1:]}"
        lowered = text[0].lower() + text[1:]
        variants = []
        for i in range(k):
            frame = self.frames[(i + attempt) % len(self.frames)]
            variant = frame.format(swapped=swapped, lowered=lowered)
            if (i + attempt) >= len(self.frames):
                variant = f"({(i + attempt) // len(self.frames)}) {variant}"
            variants.append(variant)
        return variants


_TOKEN_RE = re.compile(r"\[\s*(NON[\s-]?VIOLENT|VIOLENT)\s*\]", re.I)


def parse_zero_shot(raw_response: str) -> ZeroShotResult:
    """Extract the bracketed verdict token from a zero-shot response.

    Case-insensitive; parse succeeds only when exactly one distinct token
    appears. Ambiguous or token-free responses keep the raw text for audit
    and leave the decision to the caller.
    """
    tokens = {
        LABEL_VIOLENT if m.group(1).upper() == "VIOLENT" else LABEL_NONVIOLENT
        for m in _TOKEN_RE.finditer(raw_response)
    }
    if len(tokens) == 1:
        return ZeroShotResult(raw_response=raw_response, label=tokens.pop(), parse_ok=True)
    return ZeroShotResult(raw_response=raw_response, label=None, parse_ok=False)


_VIOLENT_CUES = (
    "kill", "slew", "slay", "slaughter", "massacre", "stabbed", "stoned",
    "strangle", "behead", "butcher", "smote", "ran him through", "ran her through",
    "cut down", "cut him down", "put to the sword", "put to death", "wounded",
    "murdered", "executed", "tortured", "mutilat", "bloodshed", "struck down",
    "fell upon his own sword", "took her own life", "took his own life",
)


class StubZeroShotChat:
    """Offline stand-in for the zero-shot annotator model.

    A pure keyword heuristic over the passage text, emitting the same
    bracketed tokens the live model is instructed to produce.
    """

    model_name = "stub-zeroshot"

    def complete(self, request: ChatRequest) -> str:
        text = request.user_text.lower()
        if any(cue in text for cue in _VIOLENT_CUES):
            return "[VIOLENT]"
        return "[NON-VIOLENT]"

    def close(self):
        pass


class ZeroShotAnnotator:
    """Zero-shot violence classification with the versioned system prompt."""

    def __init__(self, chat, cache_dir: str | Path | None = None, max_retries: int = 3):
        self.chat = chat
        self.cache = ResponseCache(cache_dir) if cache_dir else None
        self.prompt = load_prompt(ZERO_SHOT_PROMPT_VERSION)
        self.checksum = prompt_checksum(self.prompt)
        self.max_retries = max_retries
        self.ambiguous_count = 0

    def classify_zero_shot(self, text: str) -> ZeroShotResult:
        if not text or not text.strip():
            raise ValidationError("cannot classify empty text")
        input_hash = _input_hash(text)
        raw = self.cache.get(self.checksum, input_hash) if self.cache else None
        if raw is None:
            raw = self.chat.complete(
                ChatRequest(
                    system_prompt=self.prompt,
                    user_text=text,
                    model_name=getattr(self.chat, "model_name", "unknown"),
                    temperature=DEFAULT_ZERO_SHOT_TEMPERATURE,
                    max_retries=self.max_retries,
                )
            )
            if self.cache:
                self.cache.put(self.checksum, input_hash, raw)
        return parse_zero_shot(raw)

    def label_or_default(self, result: ZeroShotResult) -> str:
        """Resolve ambiguous responses to non-violent, with an audit entry."""
        if result.parse_ok:
            return result.label
        self.ambiguous_count += 1
        log.warning(
            "unparseable zero-shot response counted as %s: %.120s",
            LABEL_NONVIOLENT,
            result.raw_response,
        )
        return LABEL_NONVIOLENT
