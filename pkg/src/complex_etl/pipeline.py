"""The ETL pipeline as five service agents driven by a supervising agent.

Every manifest entry becomes one conversation::

    extract -> wrap -> emit-xml -> shred -> load

The supervisor forwards each stage's ``Inform`` to the next provider and
closes the conversation on ``Done`` or ``Failure``.  A failing source never
affects the others.
"""
from __future__ import annotations

import logging
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

from .agents import (
    Agent,
    AgentId,
    AgentPlatform,
    MessageEnvelope,
    Performative,
    ServiceDescriptor,
)
from .dtd import DtdAst
from .errors import MissingAgent, SinkUnavailable
from .extraction import ManifestEntry, extract
from .model import wrap
from .ods import OdsHandle, record_load
from .relational import RelationalSchema, dtd_to_relational, infer_root
from .shredding import ensure_schema, load, next_ids, shred
from .xmlgen import emit_xml, write_xml

log = logging.getLogger(__name__)

STAGES = ("extract", "wrap", "emit-xml", "shred", "load")

SUPERVISOR = "menu-agent"


@dataclass(frozen=True)
class PipelineContext:
    """Run-wide settings shipped with each request."""

    dtd: DtdAst
    root: str
    schema: RelationalSchema
    sink: Optional[OdsHandle] = None
    out_dir: Optional[Path] = None
    dtd_file: Optional[str] = None
    prompt: Optional[Callable] = None


@dataclass(frozen=True)
class Job:
    payload: Any
    context: PipelineContext


@dataclass(frozen=True)
class LoadOutcome:
    object_id: str
    root_id: int
    rows_inserted: dict


@dataclass
class PipelineReport:
    objects_processed: int = 0
    objects_failed: int = 0
    per_stage_counts: dict = field(default_factory=lambda: {s: 0 for s in STAGES})
    failures: list = field(default_factory=list)  # (source, stage, diagnostic)
    loaded: list = field(default_factory=list)  # (source, object_id, root_id)

    def to_dict(self) -> dict:
        return {
            "objects_processed": self.objects_processed,
            "objects_failed": self.objects_failed,
            "per_stage_counts": dict(self.per_stage_counts),
            "failures": [
                {"source": s, "stage": st, "diagnostic": d} for s, st, d in self.failures
            ],
            "loaded": [
                {"source": s, "object_id": o, "root_id": r} for s, o, r in self.loaded
            ],
        }

    def render(self) -> str:
        lines = [
            f"objects processed: {self.objects_processed}",
            f"objects failed:    {self.objects_failed}",
            "stage completions: " + ", ".join(f"{k}={v}" for k, v in self.per_stage_counts.items()),
        ]
        for source, stage, diag in self.failures:
            lines.append(f"FAILED {source} at {stage}: {diag}")
        return "\n".join(lines)


# -- stage agents -------------------------------------------------------------

class _StageAgent(Agent):
    def handle(self, envelope):
        if envelope.performative is not Performative.REQUEST:
            return None
        job = envelope.payload
        return self.work(job.payload, job.context)

    def work(self, payload, ctx):
        raise NotImplementedError


class DataAgent(_StageAgent):
    services = ("extract",)

    def work(self, entry: ManifestEntry, ctx):
        attrs = extract(entry)
        if ctx.prompt is not None:
            attrs = ctx.prompt(attrs)
        return attrs


class WrapperAgent(_StageAgent):
    services = ("wrap",)

    def work(self, attrs, ctx):
        return wrap(attrs)


class XmlCreatorAgent(_StageAgent):
    services = ("emit-xml",)

    def work(self, obj, ctx):
        doc = emit_xml(obj, ctx.dtd, root=ctx.root)
        if ctx.out_dir is not None:
            write_xml(doc, Path(ctx.out_dir) / f"{obj.object_id}.xml", doctype=ctx.dtd_file)
        return doc


class Xml2RdbAgent(_StageAgent):
    services = ("shred",)

    def work(self, doc, ctx):
        return shred(doc, ctx.schema)


class LoaderAgent(_StageAgent):
    services = ("load",)

    def handle(self, envelope):
        if envelope.performative is not Performative.REQUEST:
            return None
        object_id, rows = envelope.payload.payload
        sink = envelope.payload.context.sink
        schema = envelope.payload.context.schema
        with sink.write_lock:
            rows = rows.offset(next_ids(schema, sink))
            report = load(rows, sink)
        outcome = LoadOutcome(object_id, rows.root.id, report.rows_inserted)
        return envelope.reply(Performative.DONE, outcome)


STANDARD_AGENTS = (
    ("data-agent", DataAgent),
    ("wrapper-agent", WrapperAgent),
    ("xml-creator", XmlCreatorAgent),
    ("xml2rdb-agent", Xml2RdbAgent),
    ("loader-agent", LoaderAgent),
)


def register_standard_agents(platform: AgentPlatform) -> list:
    return [platform.register_agent(cls(name)) for name, cls in STANDARD_AGENTS]


# -- supervision ----------------------------------------------------------------

@dataclass
class _Conversation:
    index: int
    entry: ManifestEntry
    stage: int = 0
    object_id: Optional[str] = None


def run_pipeline(platform: AgentPlatform, manifest, dtd: DtdAst, sink: OdsHandle,
                 root: str = None, out_dir=None, dtd_file: str = None,
                 prompt: Callable = None, timeout: float = 60.0) -> PipelineReport:
    """Push every manifest entry through the five stage services.

    The calling thread plays the supervisor: it owns a passive mailbox,
    forwards replies stage to stage and aggregates a report in manifest
    order.
    """
    providers = {}
    for service in STAGES:
        found = platform.directory_lookup(service)
        if not found:
            raise MissingAgent(f"no agent provides the {service!r} service")
        providers[service] = found[0]
    if sink is None or getattr(sink, "closed", False):
        raise SinkUnavailable("the ODS handle is closed or missing")

    root = root or infer_root(dtd)
    schema = dtd_to_relational(dtd, root)
    ensure_schema(schema, sink)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    ctx = PipelineContext(dtd, root, schema, sink, out_dir, dtd_file, prompt)

    me = AgentId(SUPERVISOR)
    if me not in platform.agents():
        platform.register_agent(ServiceDescriptor(me, ("supervise",)))
    platform.start()

    entries = list(manifest)
    report = PipelineReport()
    run_tag = uuid.uuid4().hex[:8]
    conversations = {}
    for i, entry in enumerate(entries):
        cid = f"{run_tag}-{i}"
        conversations[cid] = _Conversation(i, entry)
        platform.send(MessageEnvelope(
            Performative.REQUEST, me, providers["extract"], cid, Job(entry, ctx)))

    outcomes = {}
    open_convs = set(conversations)
    while open_convs:
        env = platform.receive(me, timeout=timeout)
        conv = conversations.get(env.conversation)
        if conv is None or env.conversation not in open_convs:
            log.warning("ignoring stray message for conversation %s", env.conversation)
            continue
        stage = STAGES[conv.stage]
        if env.performative is Performative.FAILURE:
            outcomes[conv.index] = ("failed", stage, env.payload)
            open_convs.discard(env.conversation)
            continue
        report.per_stage_counts[stage] += 1
        if env.performative is Performative.DONE:
            outcomes[conv.index] = ("loaded", env.payload)
            open_convs.discard(env.conversation)
            continue
        payload = env.payload
        if stage == "wrap":
            conv.object_id = payload.object_id
        conv.stage += 1
        nxt = STAGES[conv.stage]
        if nxt == "load":
            payload = (conv.object_id, payload)
        platform.send(MessageEnvelope(
            Performative.REQUEST, me, providers[nxt], env.conversation, Job(payload, ctx)))

    by_index = {c.index: c for c in conversations.values()}
    for i, entry in enumerate(entries):
        source = entry.source
        uri = Path(entry.path).resolve().as_uri()
        result = outcomes[i]
        if result[0] == "loaded":
            outcome = result[1]
            report.objects_processed += 1
            report.loaded.append((source, outcome.object_id, outcome.root_id))
            record_load(sink, uri, outcome.object_id, "loaded", outcome.root_id)
        else:
            _, stage, diagnostic = result
            report.objects_failed += 1
            report.failures.append((source, stage, diagnostic))
            record_load(sink, uri, by_index[i].object_id, "failed",
                        diagnostic=diagnostic)
    return report
