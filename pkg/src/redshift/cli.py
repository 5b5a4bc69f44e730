"""Command-line front end.

    redshift [pages] --prime 3 --group Cp^1 --variant tate --window s=-800..800,n=0..80 --page inf
    redshift --prime 7 tc [WHICH] [--emit json|table|poincare]
    redshift --prime 7 k-padic
    redshift verify SUITE [--prime P]

Options may also come from ``--config FILE`` (flat ``key=value`` lines with
the flag names); flags override the file, which overrides the defaults.
Exit status: 0 success, 1 mismatch, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from . import catalog, tcasm, verify
from .catalog import Group, NoClosedFormError, Variant, closed_form, displayed_pages
from .fpalg import AlgebraError, DomainError, Window, check_prime
from .inventory import compare_dims, materialize
from .ssengine import EngineError, page_at, thread_count

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG = 0, 1, 2

DEFAULTS = {
    "prime": "7",
    "group": "Cp^1",
    "variant": "tate",
    "window": "s=-800..800,n=0..80",
    "page": "displayed",
    "emit": "table",
    "out": "-",
}
EMITS = ("json", "table", "poincare")
SUBCOMMANDS = ("pages", "tc", "verify")


class ConfigError(ValueError):
    """Bad flags, config file or environment."""


@dataclass(frozen=True)
class RunConfig:
    prime: int
    group: Group
    variant: Variant
    window: Window
    page: str
    emit: str
    out: str
    threads: int

    @property
    def formal(self) -> bool:
        return self.prime < 7


def read_config_file(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for i, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or key not in DEFAULTS:
            raise ConfigError(f"{path}:{i}: expected one of {', '.join(DEFAULTS)} as key=value")
        out[key] = value.strip()
    return out


def _common(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--prime", default=s, help="odd prime p (p < 7 runs in formal mode)")
    parser.add_argument("--config", default=s, help="flat key=value file with flag names as keys")
    parser.add_argument("--emit", default=s, help="output format: json, table or poincare")
    parser.add_argument("--out", default=s, help="output path, '-' for standard output")


def build_parser() -> argparse.ArgumentParser:
    s = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="redshift", description=__doc__.split("\n\n")[0])
    _common(parser)
    sub = parser.add_subparsers(dest="command")
    pages = sub.add_parser("pages", help="run a schedule and compare pages with closed forms")
    _common(pages)
    for p in (parser, pages):
        p.add_argument("--group", default=s, help="T or Cp^N")
        p.add_argument("--variant", default=s, help="hfp, tate or loc-hfp")
        p.add_argument("--window", default=s, help="s=A..B,n=C..D")
        p.add_argument("--page", default=s, help="page index, inf or displayed")
    tc = sub.add_parser("tc", help="emit a TC or K generator table")
    _common(tc)
    tc.add_argument("which", nargs="?", default="tc", help=", ".join(tcasm.ASSEMBLERS))
    ver = sub.add_parser("verify", help="run the cross-module verification suite")
    _common(ver)
    ver.add_argument("suite", help="quick or full")
    return parser


def _settings(ns: argparse.Namespace) -> dict[str, str]:
    merged = dict(DEFAULTS)
    given = vars(ns)
    if "config" in given:
        merged.update(read_config_file(given["config"]))
    for key in DEFAULTS:
        if key in given:
            merged[key] = given[key]
    return merged


def _prime(text: str) -> int:
    try:
        return check_prime(int(text))
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"invalid prime {text!r}: {exc}") from exc


def _emit_format(text: str) -> str:
    if text not in EMITS:
        raise ConfigError(f"unknown emit format {text!r} (expected {', '.join(EMITS)})")
    return text


def _threads() -> int:
    try:
        return thread_count()
    except (ValueError, EngineError) as exc:
        raise ConfigError(str(exc)) from exc


def make_config(settings: dict[str, str]) -> RunConfig:
    try:
        group = Group.parse(settings["group"])
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc
    try:
        variant = Variant(settings["variant"])
    except ValueError:
        raise ConfigError(f"unknown variant {settings['variant']!r} (expected hfp, tate or loc-hfp)") from None
    try:
        window = Window.parse(settings["window"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if window.is_empty:
        raise ConfigError(f"window {settings['window']} is empty")
    page = settings["page"]
    if page not in ("inf", "displayed"):
        try:
            if int(page) < 2:
                raise ValueError
        except ValueError:
            raise ConfigError(f"page must be an index >= 2, inf or displayed, got {page!r}") from None
    return RunConfig(_prime(settings["prime"]), group, variant, window, page,
                     _emit_format(settings["emit"]), settings["out"], _threads())


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------------------
# pages


def _selected(cfg: RunConfig, pages) -> list[tuple[object, object]]:
    last = pages[-1]
    if cfg.page == "inf":
        return [(catalog.INF, last)]
    if cfg.page == "displayed":
        out = []
        for r in displayed_pages(cfg.group, cfg.variant, cfg.prime):
            out.append((r, last if r == catalog.INF else page_at(pages, r)))
        return out
    r = int(cfg.page)
    if r > pages[-1].index:
        return [(r, last)]
    return [(r, page_at(pages, r))]


def _diff(cfg: RunConfig, r, page) -> list | None:
    """Per-bidegree differences from the closed form, ``None`` if there is none."""
    try:
        cf = closed_form(cfg.group, cfg.variant, r, cfg.prime)
    except NoClosedFormError:
        return None
    region = page.safe_region
    if region is None:
        return []
    inv = cf.inventory
    if inv.degree_floor is not None:
        region = region.intersect(Window(region.s_min, region.s_max, inv.degree_floor, region.n_max))
    expected = materialize(inv, page.window, page.ambient).dims
    return compare_dims(page.dims(region), expected, region)


def _page_poincare(page) -> dict[int, int]:
    out: dict[int, int] = {}
    for (s, n), d in page.dims().items():
        out[n] = out.get(n, 0) + d
    return dict(sorted(out.items()))


def render_pages(cfg: RunConfig, selected) -> tuple[str, bool]:
    diffs = [(r, page, _diff(cfg, r, page)) for r, page in selected]
    clean = all(not d for _, _, d in diffs)
    if cfg.emit == "json":
        doc = {
            "prime": cfg.prime,
            "formal": cfg.formal,
            "group": str(cfg.group),
            "variant": cfg.variant.value,
            "pages": [],
        }
        for r, page, diff in diffs:
            entry = page.to_json()
            entry["page_index"] = r
            entry["closed_form"] = diff is not None
            entry["diff"] = [{"s": x[0], "n": x[1], "found": a, "expected": b} for x, a, b in (diff or [])]
            doc["pages"].append(entry)
        return json.dumps(doc, indent=2), clean
    lines = []
    for r, page, diff in diffs:
        mode = " (formal)" if cfg.formal else ""
        lines.append(f"# E^{r} of the {cfg.variant.value} spectral sequence for {cfg.group} at p={cfg.prime}{mode}")
        lines.append(f"# safe region: {page.safe_region if page.safe_region else 'empty'}")
        if cfg.emit == "poincare":
            lines.append(tcasm.format_poincare(_page_poincare(page)))
        else:
            for (s, n), dim in sorted(page.dims().items(), key=lambda kv: (kv[0][1], kv[0][0])):
                basis = ", ".join(b.format() for b in page.basis(s, n))
                lines.append(f"{s:>7} {n:>6} {dim:>3}  {basis}")
        if diff is None:
            lines.append("# closed form: none for this page")
        elif not diff:
            lines.append("# closed form: match")
        else:
            lines.append(f"# closed form: {len(diff)} mismatches")
            for (s, n), a, b in diff:
                lines.append(f"#   ({s}, {n}): found {a}, expected {b}")
    return "\n".join(lines), clean


def cmd_pages(cfg: RunConfig) -> int:
    pages = catalog.run_pages(cfg.group, cfg.variant, cfg.prime, cfg.window, threads=cfg.threads)
    selected = _selected(cfg, pages)
    if pages[-1].safe_region is None:
        print("warning: the safe region is empty; widen the window", file=sys.stderr)
    text, clean = render_pages(cfg, selected)
    _write(text, cfg.out)
    if not clean:
        print("error: computed pages differ from the closed form", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


# ---------------------------------------------------------------------------
# tables and verification


def cmd_tc(prime: int, which: str, emit: str = "table", out: str = "-") -> int:
    if which not in tcasm.ASSEMBLERS:
        raise ConfigError(f"unknown table {which!r} (expected {', '.join(tcasm.ASSEMBLERS)})")
    table = tcasm.ASSEMBLERS[which](prime)
    verdict = EXIT_OK
    extra = ""
    if which == "tc":
        same = tcasm.poincare_series(table) == tcasm.reference_poincare(prime)
        extra = f"# poincare: {'OK' if same else 'MISMATCH'}"
        verdict = EXIT_OK if same else EXIT_MISMATCH
    if emit == "json":
        text = table.to_json()
    elif emit == "poincare":
        series = dict(sorted(table.degree_counts(free_only=True).items()))
        text = tcasm.format_poincare(series)
    else:
        text = table.to_table()
    if extra and emit != "json":
        text = text + "\n" + extra
    _write(text, out)
    if verdict:
        print("error: Poincaré series differs from the closed formula", file=sys.stderr)
    return verdict


def cmd_verify(suite: str, prime: int | None = None, out: str = "-") -> int:
    if suite not in ("quick", "full"):
        raise ConfigError(f"unknown suite {suite!r} (expected quick or full)")
    checks = verify.criteria(suite, thread_count())
    if prime is not None:
        checks = [c for c in checks if _concerns(c[0], prime)]
    lines = []
    failed = 0
    for name, budget, fn in checks:
        res = verify.timed(name, budget, fn)
        failed += not res.passed
        lines.append(res.line())
        if out == "-":
            print(res.line(), flush=True)
    summary = f"{len(checks) - failed}/{len(checks)} checks passed"
    if out == "-":
        print(summary)
    else:
        _write("\n".join(lines + [summary]), out)
    return EXIT_MISMATCH if failed else EXIT_OK


def _concerns(name: str, prime: int) -> bool:
    tail = name.rsplit("-", 1)[-1]
    return not (tail.startswith("p") and tail[1:].isdigit()) or tail == f"p{prime}"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    tables = [i for i, a in enumerate(argv) if a in tcasm.ASSEMBLERS and a != "tc"]
    if tables and "tc" not in argv and "verify" not in argv:
        # a table name on its own stands for "tc NAME"
        argv.insert(tables[0], "tc")
    elif not any(a in SUBCOMMANDS for a in argv) and not any(a in ("-h", "--help") for a in argv):
        argv.insert(0, "pages")
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        settings = _settings(ns)
        emit = _emit_format(settings["emit"])
        if ns.command == "tc":
            return cmd_tc(_prime(settings["prime"]), ns.which, emit, settings["out"])
        if ns.command == "verify":
            prime = _prime(settings["prime"]) if "prime" in vars(ns) else None
            return cmd_verify(ns.suite, prime, settings["out"])
        return cmd_pages(make_config(settings))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except AlgebraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
