"""Raw article corpus: loading and sanity checks for articles.jsonl."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class Article:
    id: str
    text: str
    timestamp: str = ""


@dataclass(frozen=True)
class RawCorpus:
    articles: list[Article] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for a in self.articles:
            if a.id in seen:
                raise ValueError(f"duplicate article id {a.id!r}")
            seen.add(a.id)

    def __len__(self) -> int:
        return len(self.articles)


def load_articles(path: str | Path) -> RawCorpus:
    """Read articles.jsonl: one {"id", "text", "timestamp"?} object per line."""
    path = Path(path)
    articles: list[Article] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict) or "id" not in obj or "text" not in obj:
                raise ValueError(f"{path}: line {lineno}: object needs id and text")
            articles.append(
                Article(str(obj["id"]), str(obj["text"]), str(obj.get("timestamp", "")))
            )
    return RawCorpus(articles)
