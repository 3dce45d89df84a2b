"""Command-line entry point: ingest | train | extract | analyze | report |
serve | demo."""

from __future__ import annotations

import sys

import click

from .config import ConfigError, PipelineConfig
from .pipeline import Pipeline, StageError


def _pipeline(ctx) -> Pipeline:
    cfg: PipelineConfig = ctx.obj["config"]
    return Pipeline(cfg, use_llm=not ctx.obj["no_llm"])


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--seed", type=int, default=None, help="Override the pipeline seed.")
@click.option("--no-llm", is_flag=True, help="Disable the LLM stage (deterministic fallbacks only).")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="Override the output directory.")
@click.pass_context
def main(ctx, config_path, seed, no_llm, out_dir):
    """Weakly-supervised need analytics over registry + feedback streams."""
    try:
        cfg = PipelineConfig.load(config_path)
    except ConfigError as exc:
        _fail(exc)
    if seed is not None:
        cfg.seed = seed
    if out_dir is not None:
        cfg.output_dir = out_dir
    ctx.ensure_object(dict)
    ctx.obj["config"] = cfg
    ctx.obj["no_llm"] = no_llm


def _stage(ctx, name):
    try:
        result = getattr(_pipeline(ctx), name)()
        click.echo(f"{name}: ok {result}")
    except (StageError, ConfigError) as exc:
        _fail(exc)
    except Exception as exc:
        _fail(exc)


@main.command()
@click.pass_context
def ingest(ctx):
    """Ingest the registry CSV and feedback JSONL into a corpus."""
    _stage(ctx, "ingest")


@main.command()
@click.pass_context
def train(ctx):
    """Fit the topic model (optionally selecting K by held-out perplexity)."""
    _stage(ctx, "train")


@main.command()
@click.pass_context
def extract(ctx):
    """Run wave-by-wave need extraction and update the need graph."""
    _stage(ctx, "extract")


@main.command()
@click.pass_context
def analyze(ctx):
    """Compute prevalence, strata, sentiment and the dashboard dataset."""
    _stage(ctx, "analyze")


@main.command()
@click.pass_context
def report(ctx):
    """Write the markdown insight report."""
    _stage(ctx, "report")


@main.command()
@click.option("--dir", "data_dir", type=click.Path(), default="demo-data", help="Where to write the fixture.")
@click.option("--scale", is_flag=True, help="Generate the survey-scale fixture instead of the small demo.")
@click.pass_context
def demo(ctx, data_dir, scale):
    """Generate a synthetic dataset and run the full pipeline on it."""
    from .fixtures import make_demo, make_scale

    cfg: PipelineConfig = ctx.obj["config"]
    if scale:
        make_scale(data_dir, seed=cfg.seed)
    else:
        make_demo(data_dir, seed=cfg.seed)
    cfg.registry_path = f"{data_dir}/registry.csv"
    cfg.feedback_path = f"{data_dir}/feedback.jsonl"
    # small corpora need gentler vocabulary/model settings than production
    cfg.min_df = 2
    cfg.topics = min(cfg.topics, 6)
    cfg.iterations = min(cfg.iterations, 300)
    cfg.burn_in = min(cfg.burn_in, 100)
    cfg.sample_lag = min(cfg.sample_lag, 5)
    try:
        pipe = Pipeline(cfg, use_llm=not ctx.obj["no_llm"])
        pipe.run_all(auto_label=True)
        click.echo(f"demo: ok artifacts in {cfg.output_dir}")
    except Exception as exc:
        _fail(exc)


@main.command()
@click.pass_context
def serve(ctx):
    """Serve the expert-console HTTP API."""
    import uvicorn

    from .server import create_app

    cfg: PipelineConfig = ctx.obj["config"]
    try:
        app = create_app(cfg, use_llm=not ctx.obj["no_llm"])
    except StageError as exc:
        _fail(exc)
    uvicorn.run(app, host=cfg.bind_host, port=cfg.bind_port)


if __name__ == "__main__":
    main()
