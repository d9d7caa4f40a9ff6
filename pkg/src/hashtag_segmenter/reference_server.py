"""Minimal conforming endpoint for integration tests and desk runs.

Answers score requests with corpus unigram log-probabilities and, when a
phrase table is given, translation requests (any request carrying ``src``).

Usage:
    python -m hashtag_segmenter.reference_server --corpus freq.tsv
    python -m hashtag_segmenter.reference_server --corpus freq.tsv --port 9000
"""

import argparse
import asyncio
import json
import sys
from typing import Any

from pydantic import ValidationError

from hashtag_segmenter.codemix import PhraseTableTranslator
from hashtag_segmenter.logging_config import get_logger, setup_logging
from hashtag_segmenter.models import ScoreRequest, TranslateRequest
from hashtag_segmenter.scoring import DEFAULT_DELTA, CorpusModel, corpus_score

logger = get_logger("reference_server")


class ReferenceHandler:
    """Turns one request line into one response line."""

    def __init__(self, model: CorpusModel, table: PhraseTableTranslator | None = None) -> None:
        self.model = model
        self.table = table

    def handle(self, line: str) -> str:
        try:
            data: Any = json.loads(line)
        except json.JSONDecodeError as e:
            return json.dumps({"id": None, "error": f"invalid JSON: {e}"})
        try:
            if isinstance(data, dict) and "src" in data:
                return self._translate(TranslateRequest.model_validate(data))
            return self._score(ScoreRequest.model_validate(data))
        except ValidationError as e:
            request_id = data.get("id") if isinstance(data, dict) else None
            return json.dumps({"id": request_id, "error": str(e)})

    def _score(self, request: ScoreRequest) -> str:
        scores = [corpus_score(self.model, text) for text in request.texts]
        return json.dumps({"id": request.id, "scores": scores}, ensure_ascii=False)

    def _translate(self, request: TranslateRequest) -> str:
        if self.table is None:
            return json.dumps({"id": request.id, "error": "no phrase table loaded"})
        texts = [self.table.translate(text) for text in request.texts]
        return json.dumps({"id": request.id, "texts": texts}, ensure_ascii=False)


def serve_stdio(handler: ReferenceHandler) -> None:
    """Answer requests from stdin until EOF."""
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(handler.handle(line) + "\n")
        sys.stdout.flush()


async def serve_tcp(handler: ReferenceHandler, host: str, port: int) -> None:
    """Answer requests on every accepted TCP connection."""

    async def on_connection(reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            while line := await reader.readline():
                if line.strip():
                    writer.write(handler.handle(line.decode("utf-8")).encode("utf-8") + b"\n")
                    await writer.drain()
        finally:
            writer.close()

    server = await asyncio.start_server(on_connection, host, port, limit=2**24)
    logger.info("Reference server listening: host=%s port=%d", host, port)
    async with server:
        await server.serve_forever()


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Reference scorer/translator endpoint")
    parser.add_argument("--corpus", required=True, help="word<TAB>count frequency file")
    parser.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    parser.add_argument("--phrase-table", help="source<TAB>target translation table")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, help="serve TCP instead of stdio")
    args = parser.parse_args(argv)

    setup_logging(level="WARNING")
    handler = ReferenceHandler(
        CorpusModel.from_file(args.corpus, args.delta),
        PhraseTableTranslator.from_file(args.phrase_table) if args.phrase_table else None,
    )
    if args.port is None:
        serve_stdio(handler)
    else:
        asyncio.run(serve_tcp(handler, args.host, args.port))


if __name__ == "__main__":
    main()
