"""In-process agent platform: registration, a service directory and FIFO
mailboxes, with one worker thread per active agent."""
from __future__ import annotations

import enum
import itertools
import logging
import queue
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .errors import DuplicateAgent, InvalidDescriptor, PipelineTimeout, UnknownReceiver

log = logging.getLogger(__name__)


class Performative(str, enum.Enum):
    REQUEST = "Request"
    INFORM = "Inform"
    FAILURE = "Failure"
    DONE = "Done"


@dataclass(frozen=True, order=True)
class AgentId:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InvalidDescriptor("agent name must be a non-empty string")

    def __str__(self):
        return self.name

    @classmethod
    def of(cls, value) -> "AgentId":
        return value if isinstance(value, AgentId) else cls(value)


@dataclass(frozen=True)
class MessageEnvelope:
    performative: Performative
    sender: AgentId
    receiver: AgentId
    conversation: str
    payload: Any = None

    def __post_init__(self):
        object.__setattr__(self, "performative", Performative(self.performative))
        object.__setattr__(self, "sender", AgentId.of(self.sender))
        object.__setattr__(self, "receiver", AgentId.of(self.receiver))
        if self.sender == self.receiver:
            raise ValueError("sender and receiver must differ")
        if self.performative is Performative.FAILURE and (
            not isinstance(self.payload, str) or not self.payload
        ):
            raise ValueError("a Failure must carry a non-empty diagnostic")

    def reply(self, performative, payload=None) -> "MessageEnvelope":
        return MessageEnvelope(performative, self.receiver, self.sender, self.conversation, payload)


@dataclass(frozen=True)
class ServiceDescriptor:
    agent: AgentId
    services: tuple
    location: str = "local"

    def __post_init__(self):
        object.__setattr__(self, "agent", AgentId.of(self.agent))
        if isinstance(self.services, str):
            raise InvalidDescriptor("services must be a collection of names, not a string")
        services = tuple(dict.fromkeys(self.services))
        if not services or not all(isinstance(s, str) and s for s in services):
            raise InvalidDescriptor("an agent must advertise at least one named service")
        object.__setattr__(self, "services", services)


@dataclass(frozen=True)
class DeliveryReceipt:
    receiver: AgentId
    position: int  # 1-based index of the envelope in the receiver's mailbox history


Handler = Callable[[MessageEnvelope], Any]


class Agent:
    """Base class for agents that answer requests.

    Subclasses set ``services`` and implement :meth:`handle`; the platform
    turns a returned value into an ``Inform`` reply and an exception into a
    ``Failure``.  Returning a :class:`MessageEnvelope` sends it unchanged.
    """

    services: tuple = ()

    def __init__(self, name: str):
        self.id = AgentId(name)

    def descriptor(self) -> ServiceDescriptor:
        return ServiceDescriptor(self.id, self.services)

    def handle(self, envelope: MessageEnvelope):
        raise NotImplementedError

    def __call__(self, envelope):
        return self.handle(envelope)


@dataclass
class _Registration:
    descriptor: ServiceDescriptor
    handler: Optional[Handler]
    mailbox: queue.Queue = field(default_factory=queue.Queue)
    delivered: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)
    thread: Optional[threading.Thread] = None


_STOP = object()


class AgentPlatform:
    """Registry, directory and message transport for in-process agents.

    Safe to use from several threads.  Each agent's mailbox is processed by
    a single worker, so envelopes from one sender to one receiver are always
    handled in send order.
    """

    def __init__(self):
        self._lock = threading.RLock()
        self._agents = {}
        self._order = itertools.count()
        self._rank = {}
        self._running = False

    # -- registration --------------------------------------------------------

    def register_agent(self, descriptor, handler: Optional[Handler] = None) -> AgentId:
        if isinstance(descriptor, Agent):
            descriptor, handler = descriptor.descriptor(), descriptor
        if not isinstance(descriptor, ServiceDescriptor):
            raise InvalidDescriptor(f"expected a ServiceDescriptor, got {descriptor!r}")
        with self._lock:
            if descriptor.agent in self._agents:
                raise DuplicateAgent(f"agent {descriptor.agent} is already registered")
            reg = _Registration(descriptor, handler)
            self._agents[descriptor.agent] = reg
            self._rank[descriptor.agent] = next(self._order)
            if self._running and handler is not None:
                self._spawn(reg)
        log.debug("registered %s for %s", descriptor.agent, descriptor.services)
        return descriptor.agent

    def deregister_agent(self, agent) -> ServiceDescriptor:
        agent = AgentId.of(agent)
        with self._lock:
            reg = self._agents.pop(agent, None)
            self._rank.pop(agent, None)
        if reg is None:
            raise UnknownReceiver(f"agent {agent} is not registered")
        if reg.thread is not None:
            reg.mailbox.put(_STOP)
            if reg.thread is not threading.current_thread():
                reg.thread.join()
        return reg.descriptor

    def relocate(self, agent, location: str) -> AgentId:
        """Record a move of ``agent`` to ``location``; only metadata changes."""
        agent = AgentId.of(agent)
        with self._lock:
            reg = self._agents.get(agent)
            if reg is None:
                raise UnknownReceiver(f"agent {agent} is not registered")
            reg.descriptor = ServiceDescriptor(agent, reg.descriptor.services, location)
        return agent

    def descriptor(self, agent) -> ServiceDescriptor:
        with self._lock:
            reg = self._agents.get(AgentId.of(agent))
        if reg is None:
            raise UnknownReceiver(f"agent {agent} is not registered")
        return reg.descriptor

    def directory_lookup(self, service: str) -> list:
        """Agents advertising ``service``, in registration order."""
        with self._lock:
            found = [a for a, reg in self._agents.items() if service in reg.descriptor.services]
            return sorted(found, key=self._rank.__getitem__)

    def agents(self) -> list:
        with self._lock:
            return sorted(self._agents, key=self._rank.__getitem__)

    # -- messaging -----------------------------------------------------------

    def send(self, envelope: MessageEnvelope) -> DeliveryReceipt:
        with self._lock:
            reg = self._agents.get(envelope.receiver)
        if reg is None:
            raise UnknownReceiver(f"no agent named {envelope.receiver}")
        with reg.lock:
            reg.delivered += 1
            reg.mailbox.put(envelope)
            return DeliveryReceipt(envelope.receiver, reg.delivered)

    def receive(self, agent, timeout: Optional[float] = None) -> MessageEnvelope:
        """Take the next envelope from a passive agent's mailbox."""
        with self._lock:
            reg = self._agents.get(AgentId.of(agent))
        if reg is None:
            raise UnknownReceiver(f"agent {agent} is not registered")
        try:
            return reg.mailbox.get(timeout=timeout)
        except queue.Empty:
            raise PipelineTimeout(f"no message for {agent} within {timeout}s") from None

    def pending(self, agent) -> int:
        with self._lock:
            return self._agents[AgentId.of(agent)].mailbox.qsize()

    # -- workers -------------------------------------------------------------

    def start(self):
        with self._lock:
            if self._running:
                return
            self._running = True
            for reg in self._agents.values():
                if reg.handler is not None and reg.thread is None:
                    self._spawn(reg)

    def shutdown(self):
        with self._lock:
            self._running = False
            regs = list(self._agents.values())
        for reg in regs:
            if reg.thread is not None:
                reg.mailbox.put(_STOP)
        for reg in regs:
            if reg.thread is not None:
                reg.thread.join()
                reg.thread = None

    @property
    def running(self) -> bool:
        return self._running

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.shutdown()

    def _spawn(self, reg):
        t = threading.Thread(
            target=self._work, args=(reg,), name=f"agent-{reg.descriptor.agent}", daemon=True)
        reg.thread = t
        t.start()

    def _work(self, reg):
        while True:
            env = reg.mailbox.get()
            if env is _STOP:
                return
            try:
                out = reg.handler(env)
            except Exception as exc:  # any handler error becomes a Failure reply
                log.debug("%s failed on %s: %s", reg.descriptor.agent, env.conversation, exc)
                out = env.reply(Performative.FAILURE, f"{type(exc).__name__}: {exc}")
            if out is None:
                continue
            if not isinstance(out, MessageEnvelope):
                out = env.reply(Performative.INFORM, out)
            try:
                self.send(out)
            except UnknownReceiver:
                log.warning("dropping reply to unregistered %s", out.receiver)
