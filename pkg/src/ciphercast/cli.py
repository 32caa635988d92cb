"""Command-line client for the experiment service.

By default the CLI talks to the FastAPI app in-process (no server needed);
``--base-url`` points it at a running instance instead.  Long simulations
checkpoint per block length, so an interrupted sweep resumes where it
stopped.

Exit codes: 0 success, 1 bad configuration, 2 failed verification.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click
import httpx

from .harness import SCHEMA_VERSION, attack_rows_csv, summary_rows_csv, to_json

_EXIT_CONFIG = 1
_EXIT_VERIFY = 2


def _client(ctx: click.Context) -> httpx.Client:
    base_url = ctx.obj.get("base_url")
    if base_url:
        return httpx.Client(base_url=base_url, timeout=None)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    response = client.post(path, json=payload)
    if response.status_code == 400:
        detail = response.json().get("detail", {})
        field = detail.get("field", "")
        message = detail.get("message", "invalid request")
        where = f" at {field}" if field else ""
        click.echo(f"config error{where}: {message}", err=True)
        sys.exit(_EXIT_CONFIG)
    if response.status_code != 200:
        click.echo(f"{path} failed with HTTP {response.status_code}: {response.text}", err=True)
        sys.exit(_EXIT_CONFIG)
    return response.json()


def _load_config(path: str, seed: int | None) -> dict:
    try:
        config = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        click.echo(f"config error: {path} is not valid JSON ({exc})", err=True)
        sys.exit(_EXIT_CONFIG)
    if not isinstance(config, dict):
        click.echo(f"config error: {path} must hold a JSON object", err=True)
        sys.exit(_EXIT_CONFIG)
    if seed is not None:
        config["seed"] = seed
    return config


def _n_values(config: dict) -> list[int]:
    if "n_list" in config:
        values = config["n_list"]
    elif "n" in config:
        values = [config["n"]]
    else:
        click.echo("config error at n: missing required field (or provide n_list)", err=True)
        sys.exit(_EXIT_CONFIG)
    if not isinstance(values, list) or not values:
        click.echo("config error at n_list: expected a nonempty list", err=True)
        sys.exit(_EXIT_CONFIG)
    return values


def _config_digest(config: dict) -> str:
    trimmed = {k: v for k, v in config.items() if k not in ("n", "n_list")}
    return hashlib.sha256(
        json.dumps(trimmed, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _write(out_dir: Path, name: str, content: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(content)
    return target


@click.group()
@click.option("--base-url", default=None, help="Talk to a running service instead of in-process.")
@click.pass_context
def main(ctx: click.Context, base_url: str | None) -> None:
    """Broadcast-cipher experiment runner."""
    ctx.ensure_object(dict)
    ctx.obj["base_url"] = base_url


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config's master seed.")
@click.option("--out-dir", default="out", type=click.Path(file_okay=False))
@click.option("--include-records", is_flag=True, help="Keep per-trial records in the JSON output.")
@click.option("--fresh", is_flag=True, help="Ignore existing checkpoints and recompute.")
@click.pass_context
def simulate(ctx, config_path, seed, out_dir, include_records, fresh) -> None:
    """Run the configured scheme end to end; one checkpoint per block length."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    digest = _config_digest(config)
    scenario = config.get("scenario_id", "default")
    summaries = []
    with _client(ctx) as client:
        for n in _n_values(config):
            checkpoint = out / f"simulate_{scenario}_n{n}.json"
            if not fresh and checkpoint.exists():
                saved = json.loads(checkpoint.read_text())
                if saved.get("config_digest") == digest and saved.get("n") == n:
                    summaries.append(saved["summary"])
                    click.echo(f"n={n}: resumed from {checkpoint}")
                    continue
            per_n = dict(config)
            per_n.pop("n", None)
            per_n["n_list"] = [n]
            body = _post(
                client,
                "/simulate",
                {"config": per_n, "include_records": include_records},
            )
            summary = body["summaries"][0]
            _write(
                out,
                checkpoint.name,
                to_json({"config_digest": digest, "n": n, "summary": summary}),
            )
            summaries.append(summary)
            click.echo(
                f"n={n}: mean_d1={summary['mean_d1']:.6f} mean_d2={summary['mean_d2']:.6f}"
                f" power={summary['mean_power']:.6f}"
            )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scenario_id": scenario,
        "summaries": summaries,
    }
    wrote = _write(out, f"simulate_{scenario}.json", to_json(payload))
    csv_rows = [{k: v for k, v in s.items() if k != "records"} for s in summaries]
    _write(out, f"simulate_{scenario}.csv", summary_rows_csv(csv_rows))
    click.echo(f"wrote {wrote} and companion CSV")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Override the config's master seed.")
@click.option("--out-dir", default="out", type=click.Path(file_okay=False))
@click.option("--fresh", is_flag=True, help="Ignore existing checkpoints and recompute.")
@click.pass_context
def attack(ctx, config_path, seed, out_dir, fresh) -> None:
    """Run the configured eavesdropper strategies and tabulate success rates."""
    config = _load_config(config_path, seed)
    out = Path(out_dir)
    digest = _config_digest(config)
    scenario = config.get("scenario_id", "default")
    rows = []
    with _client(ctx) as client:
        for n in _n_values(config):
            checkpoint = out / f"attack_{scenario}_n{n}.json"
            if not fresh and checkpoint.exists():
                saved = json.loads(checkpoint.read_text())
                if saved.get("config_digest") == digest and saved.get("n") == n:
                    rows.extend(saved["rows"])
                    click.echo(f"n={n}: resumed from {checkpoint}")
                    continue
            per_n = dict(config)
            per_n.pop("n", None)
            per_n["n_list"] = [n]
            body = _post(client, "/attack", {"config": per_n})
            _write(
                out,
                checkpoint.name,
                to_json({"config_digest": digest, "n": n, "rows": body["rows"]}),
            )
            rows.extend(body["rows"])
            for row in body["rows"]:
                click.echo(
                    f"n={n} {row['strategy']} list_rate={row['list_rate']:.4f}"
                    f" d0={row['d0']} success={row['success']:.4f} cap={row['cap']:.4f}"
                )
    payload = {"schema_version": SCHEMA_VERSION, "scenario_id": scenario, "rows": rows}
    wrote = _write(out, f"attack_{scenario}.json", to_json(payload))
    _write(out, f"attack_{scenario}.csv", attack_rows_csv(rows))
    click.echo(f"wrote {wrote} and companion CSV")


@main.command()
@click.option("--preset", type=click.Choice(["fig2", "fig5", "binary-opt"]), default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--out-dir", default="out", type=click.Path(file_okay=False))
@click.pass_context
def region(ctx, preset, config_path, out_dir) -> None:
    """Emit achievable/converse artifacts: a preset sweep or one point verdict."""
    if (preset is None) == (config_path is None):
        click.echo("config error: provide exactly one of --preset or --config", err=True)
        sys.exit(_EXIT_CONFIG)
    request = {"preset": preset} if preset else _load_config(config_path, None)
    with _client(ctx) as client:
        body = _post(client, "/region", request)
    out = Path(out_dir)
    for name, content in sorted(body["files"].items()):
        click.echo(f"wrote {_write(out, name, content)}")


@main.command()
@click.option("--seed", type=int, default=7)
@click.option("--selector", default="all", help="Substring filter on check names.")
@click.option("--out-dir", default=None, type=click.Path(file_okay=False))
@click.pass_context
def verify(ctx, seed, selector, out_dir) -> None:
    """Run the structural self-checks; nonzero exit if any check fails."""
    with _client(ctx) as client:
        body = _post(client, "/verify", {"seed": seed, "selector": selector})
    for check in body["checks"]:
        mark = "PASS" if check["verdict"] == "pass" else "FAIL"
        click.echo(
            f"{mark} {check['name']}: statistic={check['statistic']:.6g}"
            f" threshold={check['threshold']:.6g}"
        )
    if out_dir is not None:
        _write(Path(out_dir), "verify.json", to_json(body))
    if not body["all_passed"]:
        click.echo("verification failed", err=True)
        sys.exit(_EXIT_VERIFY)
    click.echo(f"all {len(body['checks'])} checks passed")


if __name__ == "__main__":
    main()
