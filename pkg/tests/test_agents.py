import threading

import pytest

from complex_etl.agents import (
    Agent,
    AgentId,
    AgentPlatform,
    MessageEnvelope,
    Performative,
    ServiceDescriptor,
)
from complex_etl.errors import DuplicateAgent, InvalidDescriptor, PipelineTimeout, UnknownReceiver


def test_register_and_lookup():
    p = AgentPlatform()
    assert p.register_agent(ServiceDescriptor("data-agent", {"extract"})) == AgentId("data-agent")
    assert p.directory_lookup("extract") == [AgentId("data-agent")]
    assert p.directory_lookup("unknown-service") == []


def test_duplicate_and_invalid_registrations():
    p = AgentPlatform()
    p.register_agent(ServiceDescriptor("a", ["x"]))
    with pytest.raises(DuplicateAgent):
        p.register_agent(ServiceDescriptor("a", ["y"]))
    with pytest.raises(InvalidDescriptor):
        ServiceDescriptor("b", set())
    with pytest.raises(InvalidDescriptor):
        ServiceDescriptor("b", "shred")
    with pytest.raises(InvalidDescriptor):
        AgentId("")


def test_lookup_keeps_registration_order():
    p = AgentPlatform()
    for name in ("zeta", "alpha", "mid"):
        p.register_agent(ServiceDescriptor(name, ["shred"]))
    assert [a.name for a in p.directory_lookup("shred")] == ["zeta", "alpha", "mid"]


def test_deregistered_agents_disappear_from_directory():
    p = AgentPlatform()
    p.register_agent(ServiceDescriptor("a", ["x"]))
    p.register_agent(ServiceDescriptor("b", ["x"]))
    p.deregister_agent("a")
    assert p.directory_lookup("x") == [AgentId("b")]
    with pytest.raises(UnknownReceiver):
        p.send(MessageEnvelope(Performative.INFORM, "b", "a", "c1"))


def test_relocation_is_metadata_only():
    p = AgentPlatform()
    p.register_agent(ServiceDescriptor("a", ["x"]))
    p.relocate("a", "container-2")
    assert p.descriptor("a").location == "container-2"
    assert p.directory_lookup("x") == [AgentId("a")]


def test_envelope_invariants():
    with pytest.raises(ValueError):
        MessageEnvelope(Performative.REQUEST, "a", "a", "c")
    with pytest.raises(ValueError):
        MessageEnvelope(Performative.FAILURE, "a", "b", "c", "")
    env = MessageEnvelope("Request", "a", "b", "c", 1)
    assert env.performative is Performative.REQUEST
    assert env.reply(Performative.DONE).receiver == AgentId("a")


def test_send_receipts_and_mailbox_order():
    p = AgentPlatform()
    p.register_agent(ServiceDescriptor("b", ["x"]))
    r1 = p.send(MessageEnvelope(Performative.INFORM, "a", "b", "c", 1))
    r2 = p.send(MessageEnvelope(Performative.INFORM, "a", "b", "c", 2))
    assert (r1.position, r2.position) == (1, 2)
    assert [p.receive("b").payload, p.receive("b").payload] == [1, 2]
    with pytest.raises(UnknownReceiver):
        p.send(MessageEnvelope(Performative.INFORM, "a", "nobody", "c"))
    with pytest.raises(PipelineTimeout):
        p.receive("b", timeout=0.01)


class Doubler(Agent):
    services = ("double",)

    def handle(self, envelope):
        if envelope.payload == "boom":
            raise RuntimeError("cannot double")
        return envelope.payload * 2


def test_active_agent_replies_and_reports_failures():
    with AgentPlatform() as p:
        p.register_agent(Doubler("doubler"))
        p.register_agent(ServiceDescriptor("client", ["ask"]))
        p.send(MessageEnvelope(Performative.REQUEST, "client", "doubler", "c1", 21))
        p.send(MessageEnvelope(Performative.REQUEST, "client", "doubler", "c2", "boom"))
        p.send(MessageEnvelope(Performative.REQUEST, "client", "doubler", "c3", 1))
        replies = [p.receive("client", timeout=5) for _ in range(3)]
    assert [r.performative for r in replies] == [Performative.INFORM, Performative.FAILURE, Performative.INFORM]
    assert replies[0].payload == 42 and replies[2].payload == 2
    assert "RuntimeError: cannot double" == replies[1].payload
    assert not p.running


def fifo_violations(senders=4, per_sender=100):
    """Order violations per (sender, receiver) pair under concurrent sends."""
    p = AgentPlatform()
    received = []
    lock = threading.Lock()

    def record(env):
        with lock:
            received.append((env.sender.name, env.payload))

    p.register_agent(ServiceDescriptor("sink", ["collect"]), record)
    p.start()
    barrier = threading.Barrier(senders)

    def worker(i):
        barrier.wait()
        for n in range(per_sender):
            p.send(MessageEnvelope(Performative.INFORM, f"sender-{i}", "sink", f"c{i}", n))

    threads = [threading.Thread(target=worker, args=(i,)) for i in range(senders)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    p.shutdown()
    violations = 0
    last = {}
    for sender, n in received:
        if n != last.get(sender, -1) + 1:
            violations += 1
        last[sender] = n
    assert len(received) == senders * per_sender
    return violations


def test_fifo_per_pair_under_concurrency():
    assert fifo_violations() == 0
