"""Command line entry point.

Subcommands::

    run          full pipeline: manifest -> XML files, schema.sql, database, report
    extract      manifest -> <out>/attributes.json
    gen-xml      <out>/attributes.json -> <out>/<object_id>.xml, <out>/index.json
    dtd2sql      DTD -> <out>/schema.sql (and the tables, with --db)
    shred        XML documents -> database rows (files listed in <out>/index.json by default)
    reconstruct  database rows -> XML on stdout

The manifest is a JSON document::

    {"entries": [
        {"path": "docs/report.txt",
         "class": "Text",
         "attributes": {"author": "R. Smith", "keywords": ["budget", "2004"]}},
        {"path": "scans/page1.png"}
    ]}

``path`` is resolved against the manifest's directory; ``class`` overrides
the extension-based classification; ``attributes`` are manual values that
take precedence over anything extracted.

Exit status: 0 on success, 1 when some source or document failed, 2 on
usage or configuration errors.  ``--db`` falls back to ``$COMPLEX_ETL_DB``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .agents import AgentPlatform
from .dtd import serialize_dtd
from .errors import ComplexEtlError, DtdError, ManifestError
from .extraction import extract, load_manifest
from .model import AttributeSet, Provenance, wrap
from .ods import find_root_id, open_ods, record_load
from .pipeline import register_standard_agents, run_pipeline
from .relational import dtd_to_relational, ddl_script, infer_root
from .shredding import create_schema, ensure_schema, load_document, reconstruct
from .validation import check_dtd
from .xmlgen import CANONICAL_ROOT, canonical_dtd, emit_xml, read_xml, to_xml_string, write_xml

log = logging.getLogger("complex_etl")

EXIT_OK, EXIT_PARTIAL, EXIT_USAGE = 0, 1, 2

PROMPTED = ("author", "description", "language", "keywords")


class ConfigError(Exception):
    pass


def prompt_missing(attrs: AttributeSet, ask=None) -> AttributeSet:
    """Ask the operator for general attributes that extraction left empty."""
    if ask is None:
        ask = input
    out = attrs.copy()
    label = attrs.get("name", "?")
    for name in PROMPTED:
        if out.get(name) not in (None, "", []):
            continue
        answer = ask(f"{name} for {label} (blank to skip): ").strip()
        if not answer:
            continue
        value = [k.strip() for k in answer.split(",") if k.strip()] if name == "keywords" else answer
        out.set(name, value, Provenance.MANUAL)
    return out


# -- helpers ------------------------------------------------------------------

def _dtd(args):
    if args.dtd is None:
        return canonical_dtd(), CANONICAL_ROOT
    try:
        dtd = check_dtd(Path(args.dtd))
    except OSError as exc:
        raise ConfigError(f"cannot read DTD {args.dtd}: {exc}") from exc
    except DtdError as exc:
        raise ConfigError(f"invalid DTD {args.dtd}: {exc}") from exc
    root = args.root or infer_root(dtd)
    return dtd, root


def _db_path(args, required=True):
    path = args.db or os.environ.get("COMPLEX_ETL_DB")
    if not path and required:
        raise ConfigError("no database given: use --db or set COMPLEX_ETL_DB")
    return path


def _out_dir(args, create=True):
    out = Path(args.out)
    if create:
        out.mkdir(parents=True, exist_ok=True)
    elif not out.is_dir():
        raise ConfigError(f"output directory {out} does not exist")
    return out


def _manifest(args):
    if not args.manifest:
        raise ConfigError("--manifest is required")
    if not Path(args.manifest).is_file():
        raise ConfigError(f"manifest {args.manifest} not found")
    try:
        return load_manifest(args.manifest)
    except ManifestError as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def _dtd_file(out, dtd, root):
    name = f"{root}.dtd"
    (out / name).write_text(serialize_dtd(dtd), encoding="utf-8")
    return name


# -- subcommands ----------------------------------------------------------------

def cmd_run(args) -> int:
    manifest = _manifest(args)
    dtd, root = _dtd(args)
    out = _out_dir(args)
    db_path = _db_path(args)
    dtd_name = _dtd_file(out, dtd, root)
    (out / "schema.sql").write_text(ddl_script(dtd_to_relational(dtd, root)), encoding="utf-8")
    prompt = prompt_missing if args.interactive else None

    with open_ods(db_path) as ods, AgentPlatform() as platform:
        register_standard_agents(platform)
        report = run_pipeline(platform, manifest, dtd, ods, root=root, out_dir=out,
                              dtd_file=dtd_name, prompt=prompt)
    _write_json(out / "index.json", [
        {"source": str(Path(s).resolve().as_uri()), "object_id": o, "xml": f"{o}.xml"}
        for s, o, _ in report.loaded
    ])
    _write_json(out / "report.json", report.to_dict())
    print(report.render())
    return EXIT_OK if report.objects_failed == 0 else EXIT_PARTIAL


def cmd_extract(args) -> int:
    manifest = _manifest(args)
    out = _out_dir(args)
    results, failures = [], []
    for entry in manifest:
        try:
            attrs = extract(entry)
            if args.interactive:
                attrs = prompt_missing(attrs)
        except ComplexEtlError as exc:
            failures.append({"source": entry.source, "diagnostic": str(exc)})
            print(f"FAILED {entry.source}: {exc}", file=sys.stderr)
            continue
        results.append({"source": entry.source, **attrs.to_dict()})
    _write_json(out / "attributes.json", {"entries": results, "failures": failures})
    print(f"extracted {len(results)} of {len(manifest)} sources -> {out / 'attributes.json'}")
    return EXIT_OK if not failures else EXIT_PARTIAL


def cmd_gen_xml(args) -> int:
    out = _out_dir(args)
    source = Path(args.input) if args.input else out / "attributes.json"
    try:
        data = json.loads(source.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read attribute file {source}: {exc}") from exc
    dtd, root = _dtd(args)
    dtd_name = _dtd_file(out, dtd, root)
    index, failed = [], 0
    for item in data.get("entries", []):
        try:
            obj = wrap(AttributeSet.from_dict(item))
            doc = emit_xml(obj, dtd, root=root)
        except ComplexEtlError as exc:
            failed += 1
            print(f"FAILED {item.get('source')}: {exc}", file=sys.stderr)
            continue
        write_xml(doc, out / f"{obj.object_id}.xml", doctype=dtd_name)
        index.append({"source": obj.source_uri, "object_id": obj.object_id,
                      "xml": f"{obj.object_id}.xml"})
    _write_json(out / "index.json", index)
    print(f"wrote {len(index)} documents to {out}")
    return EXIT_OK if not failed else EXIT_PARTIAL


def cmd_dtd2sql(args) -> int:
    dtd, root = _dtd(args)
    out = _out_dir(args)
    schema = dtd_to_relational(dtd, root)
    script = ddl_script(schema)
    (out / "schema.sql").write_text(script, encoding="utf-8")
    db_path = _db_path(args, required=False)
    if db_path:
        with open_ods(db_path) as ods:
            create_schema(schema, ods)
    print(script, end="")
    return EXIT_OK


def cmd_shred(args) -> int:
    dtd, root = _dtd(args)
    schema = dtd_to_relational(dtd, root)
    db_path = _db_path(args)
    if args.documents:
        items = [{"path": Path(p), "source": Path(p).resolve().as_uri(), "object_id": None}
                 for p in args.documents]
    else:
        out = _out_dir(args, create=False)
        try:
            index = json.loads((out / "index.json").read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"no documents given and no readable {out / 'index.json'}") from exc
        items = [{"path": out / it["xml"], "source": it["source"], "object_id": it["object_id"]}
                 for it in index]
    failed = 0
    with open_ods(db_path) as ods:
        ensure_schema(schema, ods)
        for item in items:
            try:
                doc = read_xml(item["path"])
                root_id, report = load_document(doc, schema, ods)
            except (ComplexEtlError, OSError) as exc:
                failed += 1
                print(f"FAILED {item['path']}: {exc}", file=sys.stderr)
                continue
            except Exception as exc:  # malformed XML from the parser
                failed += 1
                print(f"FAILED {item['path']}: {exc}", file=sys.stderr)
                continue
            object_id = item["object_id"] or doc.findtext("object_id")
            record_load(ods, item["source"], object_id, "loaded", root_id)
            print(f"loaded {item['path']} as {schema.root_table}#{root_id} ({report.total} rows)")
    return EXIT_OK if not failed else EXIT_PARTIAL


def cmd_reconstruct(args) -> int:
    dtd, root = _dtd(args)
    schema = dtd_to_relational(dtd, root)
    db_path = _db_path(args)
    if not Path(db_path).exists():
        raise ConfigError(f"database {db_path} does not exist")
    with open_ods(db_path) as ods:
        root_id = args.root_id
        if root_id is None:
            if not args.object_id:
                raise ConfigError("give --root-id or --object-id")
            root_id = find_root_id(ods, args.object_id)
            if root_id is None:
                print(f"no loaded document for object {args.object_id}", file=sys.stderr)
                return EXIT_PARTIAL
        doc = reconstruct(ods, schema, root_id)
    sys.stdout.write(to_xml_string(doc))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "extract": cmd_extract,
    "gen-xml": cmd_gen_xml,
    "dtd2sql": cmd_dtd2sql,
    "shred": cmd_shred,
    "reconstruct": cmd_reconstruct,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="JSON manifest of sources")
    common.add_argument("--dtd", help="DTD file (default: the built-in complex-object DTD)")
    common.add_argument("--root", help="root element of --dtd (default: inferred)")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--db", help="database file (default: $COMPLEX_ETL_DB)")
    common.add_argument("--interactive", action="store_true",
                        help="prompt for attributes left empty by extraction")
    common.add_argument("--verbose", "-v", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="complex-etl",
        description="Integrate complex data sources into a relational ODS.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("run", parents=[common], help="run the whole pipeline")
    sub.add_parser("extract", parents=[common], help="extract attributes")
    gen = sub.add_parser("gen-xml", parents=[common], help="emit XML documents")
    gen.add_argument("--input", help="attribute file (default: <out>/attributes.json)")
    sub.add_parser("dtd2sql", parents=[common], help="compile a DTD to SQL DDL")
    shred = sub.add_parser("shred", parents=[common], help="shred and load XML documents")
    shred.add_argument("documents", nargs="*", help="XML files (default: <out>/index.json)")
    rec = sub.add_parser("reconstruct", parents=[common], help="rebuild a document")
    rec.add_argument("--root-id", type=int)
    rec.add_argument("--object-id")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ComplexEtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
