"""Command-line interface: segment, tune, evaluate, pipeline.

stdout carries results only; logs and progress bars go to stderr.
"""

import argparse
import asyncio
import sys
from collections.abc import Awaitable, Callable, Sequence
from pathlib import Path

from tqdm.asyncio import tqdm

from hashtag_segmenter.codemix import build_translator, translate_tweets, write_sidecar
from hashtag_segmenter.config import PipelineConfig, load_config, render_config_fragment
from hashtag_segmenter.ensemble import (
    DualScoredCandidates,
    EnsembleWeights,
    collect_candidates,
    ensemble,
    tune,
)
from hashtag_segmenter.evaluation import (
    compute_metrics,
    format_report,
    load_gold,
    oracle_report,
)
from hashtag_segmenter.exceptions import ConfigError, HashtagSegmenterError
from hashtag_segmenter.logging_config import get_logger, setup_logging
from hashtag_segmenter.models import EvaluationReport, TuningReport
from hashtag_segmenter.pipeline import SegmentationPipeline
from hashtag_segmenter.segmentation import Segmentation

logger = get_logger("cli")

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_USAGE = 2

# flag destination -> PipelineConfig key
_OVERRIDES = {
    "segmenter_endpoint": "segmenter",
    "reranker_endpoint": "reranker",
    "corpus": "corpus",
    "e": "e",
    "topk_beam": "top_k_beam",
    "alpha": "alpha",
    "beta": "beta",
    "tune_dev": "tune_dev",
    "grid_step": "grid_step",
    "topk": "topk",
    "strict": "strict",
    "lowercase": "lowercase",
    "metric": "metric",
    "oracle_n": "oracle_n",
    "translator": "translator",
    "method": "method",
    "src": "src",
    "tgt": "tgt",
    "timeout": "timeout",
    "batch_size": "batch_size",
    "concurrency": "concurrency",
}


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--segmenter-endpoint", help="Segmenter scorer spec")
    common.add_argument("--reranker-endpoint", help="Re-ranker scorer spec")
    common.add_argument("--corpus", type=Path, help="word<TAB>count file for the built-in scorer")
    common.add_argument("--e", type=int, help="maximum beam expansions")
    common.add_argument("--topk-beam", type=int, help="beam width")
    common.add_argument("--alpha", type=float, help="ensembler weight of the Segmenter")
    common.add_argument("--beta", type=float, help="ensembler weight of the Re-ranker")
    common.add_argument("--tune-dev", type=Path, help="grid-search alpha/beta on this gold file")
    common.add_argument("--grid-step", type=float, help="alpha/beta grid step")
    common.add_argument("--topk", type=int, help="ranked rows per hashtag")
    common.add_argument("--strict", action="store_true", default=None, help="fail on bad input")
    common.add_argument(
        "--lowercase", action=argparse.BooleanOptionalAction, default=None, help="fold case"
    )
    common.add_argument("--metric", choices=["span", "boundary"], help="F1 flavor")
    common.add_argument("--oracle-n", help="comma-separated N values for oracle evaluation")
    common.add_argument("--translator", help="identity, table:PATH or an endpoint spec")
    common.add_argument("--method", choices=["t", "cmt", "cmts"], help="translation method")
    common.add_argument("--src", help="source language code")
    common.add_argument("--tgt", help="target language code")
    common.add_argument("--timeout", type=float, help="endpoint timeout in seconds")
    common.add_argument("--batch-size", type=int, help="texts per endpoint request")
    common.add_argument("--concurrency", type=int, help="items processed concurrently")
    common.add_argument("--quiet", action="store_true", help="hide progress bars")
    common.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with its four subcommands."""
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="hashtag-segmenter",
        description="Hashtag segmentation with beam search, re-ranking and ensembling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    segment = sub.add_parser("segment", parents=[common], help="segment hashtags, one per line")
    segment.add_argument("input", nargs="?", default="-", help="input file (default: stdin)")
    segment.add_argument("--output", type=Path, help="output file (default: stdout)")

    tune_cmd = sub.add_parser("tune", parents=[common], help="grid-search alpha and beta")
    tune_cmd.add_argument("dev", type=Path, help="gold dev file")
    tune_cmd.add_argument("--report", type=Path, help="write the JSON tuning report here")
    tune_cmd.add_argument("--write-config", type=Path, help="write alpha/beta as a config file")

    evaluate = sub.add_parser("evaluate", parents=[common], help="evaluate on a gold file")
    evaluate.add_argument("gold", type=Path, help="gold file")
    evaluate.add_argument("--report", type=Path, help="write the JSON evaluation report here")

    pipeline = sub.add_parser("pipeline", parents=[common], help="translate tweets")
    pipeline.add_argument("tweets", nargs="?", default="-", help="tweets file (default: stdin)")
    pipeline.add_argument("--output", type=Path, help="output file (default: stdout)")
    pipeline.add_argument("--sidecar", type=Path, help="write per-hashtag JSON lines here")
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    """Merge the config file with the flags given on the command line."""
    overrides = {key: getattr(args, dest, None) for dest, key in _OVERRIDES.items()}
    return load_config(args.config, overrides)


def _read_lines(source: str) -> list[str]:
    if source == "-":
        return sys.stdin.read().splitlines()
    with open(source, encoding="utf-8") as f:
        return f.read().splitlines()


def _write_lines(lines: Sequence[str], output: Path | None) -> None:
    text = "".join(line + "\n" for line in lines)
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        output.write_text(text, encoding="utf-8")


def _format_score(score: float | None) -> str:
    return "" if score is None else f"{score:.6f}"


async def _tuned_weights(
    pipeline: SegmentationPipeline, config: PipelineConfig, progress: bool
) -> TuningReport:
    assert config.tune_dev is not None
    dev = load_gold(config.tune_dev, lowercase=config.lowercase, strict=config.strict)
    return await tune(
        dev.pairs,
        pipeline,
        config.alpha_grid(),
        config.beta_grid(),
        metric=config.metric,
        concurrency=config.concurrency,
        progress=progress,
    )


async def _prepare_pipeline(config: PipelineConfig, progress: bool) -> SegmentationPipeline:
    pipeline = SegmentationPipeline.from_config(config)
    if config.tune_dev is not None:
        if pipeline.reranker is None:
            raise ConfigError("tune_dev needs a Re-ranker")
        report = await _tuned_weights(pipeline, config, progress)
        pipeline.weights = EnsembleWeights(report.alpha, report.beta)
    return pipeline


async def cmd_segment(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Segment one hashtag per input line.

    Each output row is ``hashtag<TAB>segmentation<TAB>s<TAB>s'``; ``s'`` is
    empty without a Re-ranker. ``topk`` rows are written per hashtag, in
    final rank order.
    """
    hashtags = [line.strip() for line in _read_lines(args.input) if line.strip()]
    if not hashtags:
        return EXIT_OK
    pipeline = await _prepare_pipeline(config, progress=not args.quiet)
    semaphore = asyncio.Semaphore(config.concurrency)

    async def one(hashtag: str) -> list[str] | None:
        async with semaphore:
            try:
                ranked = pipeline.rank(await pipeline.candidates(hashtag))
            except HashtagSegmenterError as e:
                logger.error("Cannot segment: hashtag=%s error=%s", hashtag, e)
                return None
        return [
            f"{hashtag}\t{c.text}\t{_format_score(c.score)}\t{_format_score(c.rerank_score)}"
            for c in ranked[: config.topk]
        ]

    try:
        results = await tqdm.gather(
            *(one(h) for h in hashtags), desc="Segmenting", disable=args.quiet
        )
    finally:
        await pipeline.close()

    _write_lines([row for rows in results if rows is not None for row in rows], args.output)
    failures = sum(rows is None for rows in results)
    if failures and config.strict:
        logger.error("%d of %d hashtags failed", failures, len(hashtags))
        return EXIT_FAILURES
    return EXIT_OK


async def cmd_tune(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Grid-search the ensembler weights on a dev file."""
    pipeline = SegmentationPipeline.from_config(config)
    if pipeline.reranker is None:
        raise ConfigError("tune needs a Re-ranker (--reranker-endpoint)")
    try:
        dev = load_gold(args.dev, lowercase=config.lowercase, strict=config.strict)
        report = await tune(
            dev.pairs,
            pipeline,
            config.alpha_grid(),
            config.beta_grid(),
            metric=config.metric,
            concurrency=config.concurrency,
            progress=not args.quiet,
        )
    finally:
        await pipeline.close()

    rows = ["alpha\tbeta\tf1\taccuracy"]
    rows += [f"{p.alpha:g}\t{p.beta:g}\t{p.f1:.6f}\t{p.accuracy:.6f}" for p in report.points]
    rows.append(
        f"# selected alpha={report.alpha:g} beta={report.beta:g} "
        f"f1={report.f1:.6f} accuracy={report.accuracy:.6f}"
    )
    _write_lines(rows, None)
    if args.report:
        args.report.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    if args.write_config:
        args.write_config.write_text(
            render_config_fragment({"alpha": report.alpha, "beta": report.beta}),
            encoding="utf-8",
        )
    return EXIT_OK


async def cmd_evaluate(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Evaluate the pipeline and its baselines on a gold file."""
    progress = not args.quiet
    dataset = load_gold(args.gold, lowercase=config.lowercase, strict=config.strict)
    if not len(dataset):
        raise ConfigError(f"Gold file '{args.gold}' has no usable lines")
    pipeline = await _prepare_pipeline(config, progress)
    try:
        candidates: list[DualScoredCandidates] = await collect_candidates(
            dataset.pairs, pipeline, config.concurrency, progress
        )
    finally:
        await pipeline.close()

    gold = dataset.golds
    weights = pipeline.weights

    def top1(w: EnsembleWeights) -> list[Segmentation]:
        return [ensemble(dual, w)[0].segmentation for dual in candidates]

    report = EvaluationReport(
        dataset=str(args.gold),
        items=len(dataset),
        skipped=dataset.skipped,
        alpha=weights.alpha,
        beta=weights.beta,
        final=compute_metrics(top1(weights), gold, config.metric),
        segmenter=compute_metrics(
            [dual.entries[0].segmentation for dual in candidates], gold, config.metric
        ),
        reranker_only=(
            compute_metrics(top1(EnsembleWeights(0.0, 1.0)), gold, config.metric)
            if pipeline.reranker is not None
            else None
        ),
        oracle=oracle_report(candidates, gold, config.oracle_n, config.metric),
        truncated=sum(dual.truncated for dual in candidates),
    )

    rows = [
        f"# {report.dataset}: items={report.items} skipped={report.skipped} "
        f"truncated={report.truncated} metric={config.metric}",
        format_report(report.segmenter, "segmenter"),
    ]
    if report.reranker_only is not None:
        rows.append(format_report(report.reranker_only, "reranker"))
    rows.append(format_report(report.final, f"final a={weights.alpha:g} b={weights.beta:g}"))
    rows += [format_report(o.report, f"oracle N={o.n}") for o in report.oracle]
    _write_lines(rows, None)
    if args.report:
        args.report.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return EXIT_OK


async def cmd_pipeline(args: argparse.Namespace, config: PipelineConfig) -> int:
    """Translate tweets with method t, cmt or cmts."""
    tweets = _read_lines(args.tweets)
    translator = build_translator(
        config.translator,
        src=config.src,
        tgt=config.tgt,
        timeout=config.timeout,
        batch_size=config.batch_size,
    )
    pipeline = (
        await _prepare_pipeline(config, progress=not args.quiet)
        if config.method != "t"
        else None
    )
    try:
        results = await translate_tweets(
            tweets,
            config.method,
            translator,
            pipeline,
            strict=config.strict,
            concurrency=config.concurrency,
            progress=not args.quiet,
        )
    except HashtagSegmenterError as e:
        logger.error("Pipeline aborted: %s", e)
        return EXIT_FAILURES
    finally:
        if pipeline is not None:
            await pipeline.close()
        close = getattr(translator, "close", None)
        if close is not None:
            await close()

    _write_lines([result.text for result in results], args.output)
    if args.sidecar:
        write_sidecar(args.sidecar, results)
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, PipelineConfig], Awaitable[int]]] = {
    "segment": cmd_segment,
    "tune": cmd_tune,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return its exit code."""
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level)
    try:
        config = config_from_args(args)
        return asyncio.run(COMMANDS[args.command](args, config))
    except ConfigError as e:
        logger.error("Configuration error: %s", e)
        return EXIT_USAGE
    except (HashtagSegmenterError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return EXIT_FAILURES


def main() -> None:
    """Console entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
