"""Agent/manager control plane: newline-delimited JSON over TCP, a node
registry with a journal, and the HTTP/WebSocket surface for operators."""

from .protocol import MessageType, ProtocolError, ProtocolMessage
from .registry import AppDescriptor, AppKind, Lifecycle, NodeState, Registry, Transition
from .manager import Manager
from .agent import Agent

__all__ = [
    "Agent",
    "AppDescriptor",
    "AppKind",
    "Lifecycle",
    "Manager",
    "MessageType",
    "NodeState",
    "ProtocolError",
    "ProtocolMessage",
    "Registry",
    "Transition",
]
