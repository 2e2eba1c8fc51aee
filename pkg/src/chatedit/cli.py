"""Command-line entry points.

Every flag can also be set through a CHATEDIT_<COMMAND>_<FLAG>
environment variable (click's auto-envvar naming).
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from .corpus import generate_corpus, read_corpus, write_corpus
from .logs import load_log_dir, write_log
from .manager import Session, SessionClosedError, TemplateSet, run_script
from .metrics import CATEGORIES, dialogue_report, evaluate_corpus
from .sample_scenes import write_demo_scenes
from .service import build_app
from .vision import SceneStore


@click.group()
def cli():
    """Dialogue-driven image editing: talk your way through an edit."""


def _load_store(fixtures: str) -> SceneStore:
    store = SceneStore.load(fixtures)
    if len(store) == 0:
        raise click.ClickException(f"no scene fixtures under {fixtures}")
    return store


def _open_session(fixtures: str, image: str, max_turns, template_file) -> Session:
    store = _load_store(fixtures)
    scene = store.get(image)
    if scene is None:
        known = ", ".join(store.image_ids())
        raise click.ClickException(f"unknown image {image!r} (have: {known})")
    templates = TemplateSet.from_file(template_file) if template_file else None
    return Session(scene, templates=templates, max_turns=max_turns)


@cli.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--fixtures", required=True, type=click.Path(exists=True))
@click.option("--logs", type=click.Path(), default=None,
              help="Directory for JSON-lines logs of closed sessions.")
@click.option("--max-turns", type=int, default=None,
              help="Close each session after this many user turns.")
@click.option("--templates", type=click.Path(exists=True), default=None,
              help="key=template file overriding the response wording.")
def serve(port, host, fixtures, logs, max_turns, templates):
    """Run the HTTP session API."""
    import uvicorn

    app = build_app(fixtures, log_dir=logs, max_turns=max_turns,
                    template_file=templates)
    uvicorn.run(app, host=host, port=port)


@cli.command()
@click.option("--fixtures", required=True, type=click.Path(exists=True))
@click.option("--image", required=True)
@click.option("--max-turns", type=int, default=None)
@click.option("--templates", type=click.Path(exists=True), default=None)
@click.option("--logs", type=click.Path(), default=None,
              help="Write the session log here on exit.")
@click.option("--save-image", type=click.Path(), default=None,
              help="Write the final edited image here on exit.")
def chat(fixtures, image, max_turns, templates, logs, save_image):
    """Interactive terminal dialogue over one scene."""
    session = _open_session(fixtures, image, max_turns, templates)
    click.echo(f"system> {session.greeting()}")
    click.echo("(type 'quit' to stop)")
    while not session.closed:
        try:
            text = click.prompt("you", prompt_suffix="> ", default="",
                                show_default=False)
        except (EOFError, click.Abort):
            break
        if not text.strip():
            continue
        if text.strip().lower() in ("quit", "exit"):
            break
        try:
            turn = session.step(text)
        except SessionClosedError:
            break
        click.echo(f"system> {turn.utterance}")
        if turn.image_updated:
            click.echo("(image updated)")
    log = session.close()
    if logs:
        log_dir = Path(logs)
        log_dir.mkdir(parents=True, exist_ok=True)
        path = log_dir / f"{session.session_id}.jsonl"
        write_log(log, path)
        click.echo(f"log written to {path}")
    if save_image:
        session.image.save(save_image)
        click.echo(f"image written to {save_image}")


@cli.command()
@click.option("--script", required=True, type=click.Path(exists=True),
              help="Newline-separated user utterances.")
@click.option("--fixtures", required=True, type=click.Path(exists=True))
@click.option("--image", required=True)
@click.option("--max-turns", type=int, default=None)
@click.option("--templates", type=click.Path(exists=True), default=None)
@click.option("--out", type=click.Path(), default=None,
              help="Log file to write; defaults to stdout.")
@click.option("--save-image", type=click.Path(), default=None)
def replay(script, fixtures, image, max_turns, templates, out, save_image):
    """Run a scripted dialogue and emit its log."""
    session = _open_session(fixtures, image, max_turns, templates)
    lines = Path(script).read_text(encoding="utf-8").splitlines()
    try:
        run_script(session, lines)
    except SessionClosedError:
        pass
    log = session.close()
    if out:
        write_log(log, out)
        click.echo(f"log written to {out}")
    else:
        from .logs import log_to_lines

        for line in log_to_lines(log):
            click.echo(line)
    if save_image:
        session.image.save(save_image)


@cli.group(name="eval")
def eval_group():
    """Evaluation reports over logs and corpora."""


@eval_group.command()
@click.option("--logs", "log_dir", required=True, type=click.Path(exists=True))
def dialogues(log_dir):
    """Turn statistics and per-dialogue accepted-edit ratios."""
    batch = load_log_dir(log_dir)
    if not batch:
        raise click.ClickException(f"no *.jsonl logs under {log_dir}")
    report = dialogue_report(batch)
    click.echo(f"dialogues:            {report['n_dialogues']}")
    click.echo(f"mean turns:           {report['mean_turns_per_dialogue']:.2f}")
    click.echo(f"mean user turns:      {report['mean_user_turns_per_dialogue']:.2f}")
    if report["mean_turns_per_edit"] is None:
        click.echo("mean turns per edit:  n/a (no completed edits)")
    else:
        click.echo(f"mean turns per edit:  {report['mean_turns_per_edit']:.2f}")
    if report["mean_vision_accuracy"] is None:
        click.echo("mean vision accuracy: n/a (no queries)")
    else:
        click.echo(
            f"mean vision accuracy: {report['mean_vision_accuracy']:.4f} "
            f"(over {report['vision_accuracy_defined']} dialogues, "
            f"{report['vision_accuracy_undefined']} undefined)")
    click.echo(json.dumps(report, sort_keys=True))


@eval_group.command()
@click.option("--corpus", required=True, type=click.Path(exists=True))
def nlu(corpus):
    """Span F1 of the built-in tagger against a gold corpus."""
    records = read_corpus(corpus)
    report = evaluate_corpus(records)
    click.echo(f"{'Category':<12}{'Precision':>10}{'Recall':>10}{'F1':>10}")
    for category in CATEGORIES:
        c = report.categories[category]
        click.echo(f"{category:<12}{c.precision:>10.4f}"
                   f"{c.recall:>10.4f}{c.f1:>10.4f}")
    click.echo(f"{'Mean':<12}{'':>10}{'':>10}{report.mean:>10.4f}")


@cli.command(name="gen-corpus")
@click.option("--n", required=True, type=int)
@click.option("--seed", required=True, type=int)
@click.option("--scenes", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def gen_corpus(n, seed, scenes, out):
    """Generate a seeded gold-tagged corpus of one-shot edit requests."""
    store = _load_store(scenes)
    scene_list = [store.get(image_id) for image_id in store.image_ids()]
    records = generate_corpus(n, seed, scene_list)
    write_corpus(records, out)
    click.echo(f"wrote {len(records)} records to {out}")


@cli.command(name="demo-scenes")
@click.option("--out", required=True, type=click.Path())
def demo_scenes(out):
    """Write the built-in demo scene fixtures to a directory."""
    paths = write_demo_scenes(out)
    for path in paths:
        click.echo(str(path))


def main():
    cli(auto_envvar_prefix="CHATEDIT")


if __name__ == "__main__":
    main()
