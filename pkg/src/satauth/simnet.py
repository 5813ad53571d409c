"""Deterministic in-process satellite-ground network.

Virtual time drives everything: a message sent at t over a link with
latency L is handled at exactly t+L, so transcripts are a pure function
of (scenario, seed).  Computation consumes no virtual time; wall-clock
cost is measured separately by ``delay_overhead_report``.

An adversary interposer sits on every insecure link.  It passively logs
all traffic (eavesdropping) and applies the first matching active rule:
replay (deliver again after a delay), tamper (flip chosen bits), drop,
or inject a crafted frame.  Secure links bypass it entirely.

The serving station's dual send after admitting a user goes out in the
same virtual instant, which is what keeps the authentication critical
path at two satellite-ground transmissions.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import bitops, instrument, kex, protocol, wire
from .hashing import h_items
from .protocol import Clock, LoginError, ProtocolError, RejectError
from .wire import WireError


# -- authenticated symmetric wrapping -------------------------------------


class WrapError(ValueError):
    pass


class HashStreamWrap:
    """Keystream-plus-MAC wrapping built from the system hash.

    Stands in for the block cipher on the station-control channel; any
    authenticated cipher can register under a new name.
    """

    name = "hashstream"
    NONCE = 8
    TAG = 32

    def wrap(self, key: bytes, nonce: bytes, data: bytes) -> bytes:
        instrument.COUNTS.sym_wrap += 1
        ct = bytes(a ^ b for a, b in zip(data, self._stream(key, nonce, len(data))))
        tag = hashlib.sha256(b"satauth-mac" + key + nonce + ct).digest()
        return nonce + ct + tag

    def unwrap(self, key: bytes, blob: bytes) -> bytes:
        instrument.COUNTS.sym_wrap += 1
        if len(blob) < self.NONCE + self.TAG:
            raise WrapError("wrapped frame too short")
        nonce, ct, tag = (
            blob[: self.NONCE],
            blob[self.NONCE : -self.TAG],
            blob[-self.TAG :],
        )
        if hashlib.sha256(b"satauth-mac" + key + nonce + ct).digest() != tag:
            raise WrapError("authentication tag mismatch")
        return bytes(a ^ b for a, b in zip(ct, self._stream(key, nonce, len(ct))))

    @staticmethod
    def _stream(key: bytes, nonce: bytes, length: int) -> bytes:
        out = b""
        ctr = 0
        while len(out) < length:
            out += hashlib.sha256(
                b"satauth-stream" + key + nonce + ctr.to_bytes(4, "big")
            ).digest()
            ctr += 1
        return out[:length]


WRAPS: dict[str, Callable[[], object]] = {"hashstream": HashStreamWrap}


# -- frames, links, adversary ---------------------------------------------


@dataclass
class Frame:
    kind: str
    phase: str
    bits: Optional[np.ndarray]  # protocol payload (None when wrapped)
    wrapped: Optional[bytes] = None
    origin: str = ""  # original sender, preserved across relays
    account_bits: int = 0

    def copy(self) -> "Frame":
        return Frame(
            kind=self.kind,
            phase=self.phase,
            bits=None if self.bits is None else self.bits.copy(),
            wrapped=self.wrapped,
            origin=self.origin,
            account_bits=self.account_bits,
        )


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    latency_ms: int = 10
    secure: bool = False


@dataclass
class Rule:
    action: str  # passthrough | eavesdrop | replay | tamper | drop | inject
    kind: Optional[str] = None
    src: Optional[str] = None
    dst: Optional[str] = None
    delay_ms: int = 0
    positions: tuple = ()
    frame: Optional[Frame] = None
    max_times: Optional[int] = None
    hits: int = 0

    def matches(self, frame: Frame, src: str, dst: str) -> bool:
        if self.max_times is not None and self.hits >= self.max_times:
            return False
        if self.kind is not None and frame.kind != self.kind:
            return False
        if self.src is not None and src != self.src:
            return False
        if self.dst is not None and dst != self.dst:
            return False
        return True


@dataclass
class AdversaryPolicy:
    rules: list[Rule] = field(default_factory=list)
    log: list[tuple[int, str, str, Frame]] = field(default_factory=list)

    def observe(self, now: int, src: str, dst: str, frame: Frame) -> None:
        self.log.append((now, src, dst, frame.copy()))

    def match(self, frame: Frame, src: str, dst: str) -> Optional[Rule]:
        for rule in self.rules:
            if rule.matches(frame, src, dst):
                rule.hits += 1
                return rule
        return None


# -- transcript ------------------------------------------------------------


@dataclass(frozen=True)
class Event:
    time: int
    seq: int
    etype: str  # send | recv | reject | key | accept | drop | replay | tamper | inject
    party: str
    peer: str
    kind: str
    bits: int
    depth: int
    detail: str = ""


class Transcript:
    def __init__(self):
        self.events: list[Event] = []
        self.keys: dict[str, bytes] = {}
        self._seq = 0

    def add(self, **kw) -> None:
        self._seq += 1
        self.events.append(Event(seq=self._seq, **kw))

    def lines(self) -> list[str]:
        out = []
        for e in self.events:
            out.append(
                f"t={e.time:07d} {e.etype:7s} {e.party:>8s}<->{e.peer:<8s} "
                f"{e.kind:<18s} bits={e.bits:<6d} depth={e.depth} {e.detail}".rstrip()
            )
        return out

    def rejects(self) -> list[Event]:
        return [e for e in self.events if e.etype == "reject"]

    def accepts(self) -> list[Event]:
        return [e for e in self.events if e.etype in ("key", "accept")]

    def bits_sent(self, phase: Optional[str] = None) -> dict[str, int]:
        out: dict[str, int] = {}
        for e in self.events:
            if e.etype != "send":
                continue
            if phase is not None and e.detail != phase:
                continue
            out[e.party] = out.get(e.party, 0) + e.bits
        return out

    def auth_metrics(self) -> dict:
        req = [e for e in self.events if e.etype == "send" and e.kind == "AccessRequest"]
        keys = [e for e in self.events if e.etype == "key"]
        if not req or not keys:
            return {"complete": False}
        start = req[0].time
        return {
            "complete": len(keys) >= 2,
            "virtual_delay_ms": max(e.time for e in keys) - start,
            "critical_path_transmissions": max(e.depth for e in keys),
            "keys_equal": len({self.keys[e.party] for e in keys}) == 1,
        }


# -- actors ----------------------------------------------------------------


class Actor:
    def __init__(self, name: str):
        self.name = name

    def perform(self, net: "Network", action: str, depth: int, **kwargs) -> None:
        raise ProtocolError(f"{self.name} has no action {action!r}")

    def receive(self, net: "Network", frame: Frame, src: str, depth: int) -> None:
        raise NotImplementedError


class UserActor(Actor):
    """Device-side party: registers, logs in locally, then authenticates."""

    def __init__(
        self, name, params, user_id, password, biometric,
        tcs_name, tcs_id, tcs_pk, serving_sat, rng,
    ):
        super().__init__(name)
        self.params = params
        self.user_id = user_id
        self.password = password
        self.biometric = biometric
        self.tcs_name = tcs_name
        self.tcs_id = tcs_id
        self.tcs_pk = tcs_pk
        self.serving_sat = serving_sat
        self.rng = rng
        self.reg_state = None
        self.vault = None
        self.session = None

    def perform(self, net, action, depth, **kwargs):
        if action == "register":
            msg, self.reg_state = protocol.user_register_begin(
                self.params, self.user_id, self.password, self.biometric, self.rng
            )
            net.send(self.name, self.tcs_name, net.to_frame(msg), depth)
        elif action == "auth":
            msg = protocol.user_access_request(
                self.session, self.tcs_id, self.tcs_pk, net.clock, self.rng
            )
            net.send(self.name, self.serving_sat, net.to_frame(msg), depth)
        elif action == "handover":
            nsat = kwargs["nsat"]
            msg = protocol.user_handover_request(
                self.session, net.station_ids[nsat], net.clock, self.rng
            )
            # the request travels via the serving satellite, one extra hop
            net.send(self.name, self.serving_sat, net.to_frame(msg), depth)
        else:
            super().perform(net, action, depth)

    def receive(self, net, frame, src, depth):
        msg = net.from_frame(frame)
        if isinstance(msg, wire.RegResponse):
            self.vault = protocol.user_register_finish(
                self.reg_state, self.params, msg
            )
            self.session = protocol.user_login(
                self.vault, self.user_id, self.password, self.biometric
            )
            net.transcript.add(
                time=net.clock.now, etype="accept", party=self.name, peer=src,
                kind="register", bits=0, depth=depth,
            )
        elif isinstance(msg, wire.AccessResponseUser):
            key = protocol.user_access_finish(self.session, msg, net.clock)
            net.transcript.keys[self.name] = key
            net.transcript.add(
                time=net.clock.now, etype="key", party=self.name, peer=src,
                kind="session-key", bits=0, depth=depth,
            )
        elif isinstance(msg, wire.HandoverResponse):
            protocol.user_handover_finish(self.session, msg, net.clock)
            net.transcript.add(
                time=net.clock.now, etype="accept", party=self.name, peer=src,
                kind="handover", bits=0, depth=depth,
            )
        else:
            raise RejectError("decode", f"unexpected {frame.kind} at user")


class SatelliteActor(Actor):
    def __init__(self, name, state, params, tcs_name, wrap_forward=True):
        super().__init__(name)
        self.state = state
        self.params = params
        self.tcs_name = tcs_name
        self.wrap_forward = wrap_forward
        self._wrap = HashStreamWrap()
        self._nonce = 0

    def perform(self, net, action, depth, **kwargs):
        if action == "preneg":
            msg = protocol.satellite_preneg_begin(self.state, self.params, net.clock)
            net.send(self.name, self.tcs_name, net.to_frame(msg), depth)
        else:
            super().perform(net, action, depth)

    def receive(self, net, frame, src, depth):
        msg = net.from_frame(frame)
        if isinstance(msg, wire.AccessRequest):
            response, forward = protocol.satellite_handle_access(
                self.state, self.params, msg, net.clock
            )
            # both sends leave in the same virtual instant
            net.send(self.name, frame.origin or src, net.to_frame(response), depth)
            fwd_frame = net.to_frame(forward)
            if self.wrap_forward and self.state.channel_key is not None:
                self._nonce += 1
                nonce = self._nonce.to_bytes(self._wrap.NONCE, "big")
                fwd_frame = replace(
                    fwd_frame,
                    wrapped=self._wrap.wrap(
                        self.state.channel_key, nonce, bitops.frame_bits(fwd_frame.bits)
                    ),
                    bits=None,
                )
            net.send(self.name, self.tcs_name, fwd_frame, depth)
        elif isinstance(msg, wire.HandoverRequest):
            if msg.nsat_id != self.state.sat_id:
                # serving satellite relays toward the named next station
                net.send(self.name, net.station_names[msg.nsat_id], frame, depth)
                return
            response = protocol.nsat_handle_handover(
                self.state, self.params, msg, net.clock
            )
            net.send(self.name, frame.origin or src, net.to_frame(response), depth)
        elif isinstance(msg, wire.PreNegResponse):
            protocol.satellite_preneg_finish(
                self.state, self.params, msg, net.clock, net.rng_for(self.name)
            )
            net.transcript.add(
                time=net.clock.now, etype="accept", party=self.name, peer=src,
                kind="preneg", bits=0, depth=depth,
            )
        else:
            raise RejectError("decode", f"unexpected {frame.kind} at satellite")


class TcsActor(Actor):
    def __init__(self, name, state, params):
        super().__init__(name)
        self.state = state
        self.params = params
        self._wrap = HashStreamWrap()

    def receive(self, net, frame, src, depth):
        if frame.wrapped is not None:
            link = self.state.sat_links.get(net.station_ids[src])
            if link is None:
                raise RejectError("decode", "no channel key for sender")
            try:
                payload = self._wrap.unwrap(link.channel_key, frame.wrapped)
            except WrapError as exc:
                raise RejectError("decode", str(exc)) from None
            frame = replace(frame, wrapped=None, bits=bitops.unframe_bits(payload))
        msg = net.from_frame(frame)
        if isinstance(msg, wire.AccessForwardTcs):
            key = protocol.tcs_access_finish(
                self.state, self.params, msg, net.clock, net.rng_for(self.name)
            )
            net.transcript.keys[self.name] = key
            net.transcript.add(
                time=net.clock.now, etype="key", party=self.name, peer=src,
                kind="session-key", bits=0, depth=depth,
            )
        elif isinstance(msg, wire.PreNegRequest):
            response, _ = protocol.tcs_preneg_respond(
                self.state, self.params, msg, net.clock, net.rng_for(self.name)
            )
            net.send(self.name, src, net.to_frame(response), depth)
        elif isinstance(msg, wire.RegRequest):
            response = protocol.tcs_register_user(
                self.state, self.params, msg, net.rng_for(self.name)
            )
            net.send(self.name, src, net.to_frame(response), depth)
        else:
            raise RejectError("decode", f"unexpected {frame.kind} at control station")


class ImpostorUserActor(Actor):
    """Device-less adversary: crafts an access request without credentials."""

    def __init__(self, name, params, tcs_id, serving_sat, rng):
        super().__init__(name)
        self.params = params
        self.tcs_id = tcs_id
        self.serving_sat = serving_sat
        self.rng = rng

    def perform(self, net, action, depth, **kwargs):
        if action != "auth":
            super().perform(net, action, depth)
        keys = kex.keygen(self.params.ring, self.params.public_element, self.rng)
        share = kex.initiate(self.params.ring, keys.pk, keys.sk, self.rng)
        ts = net.clock.now
        guess = bytes(self.rng.integers(0, 256, 32, dtype=np.uint8))  # no access_cred
        proof = h_items(guess, ts)
        user_tag = h_items(7, self.tcs_id, guess, share.key)
        msg = wire.AccessRequest(
            tid=7,
            tcs_id=self.tcs_id,
            ephemeral=share.ephemeral,
            signal=share.signal,
            masked_tag=bitops.xor_bytes(proof, user_tag),
            tag=h_items(7, self.tcs_id, share.ephemeral, share.signal, proof,
                        bitops.xor_bytes(proof, user_tag), ts),
            ts=ts,
        )
        net.send(self.name, self.serving_sat, net.to_frame(msg), depth)

    def receive(self, net, frame, src, depth):
        net.transcript.add(
            time=net.clock.now, etype="accept", party=self.name, peer=src,
            kind=frame.kind, bits=0, depth=depth, detail="impostor-reached",
        )


class RogueSatelliteActor(Actor):
    """Satellite that never pre-negotiated: answers without the verify key."""

    def __init__(self, name, params, rng, sat_id):
        super().__init__(name)
        self.params = params
        self.rng = rng
        self.sat_id = sat_id

    def receive(self, net, frame, src, depth):
        msg = net.from_frame(frame)
        ts = net.clock.now
        if isinstance(msg, wire.AccessRequest):
            guess = bytes(self.rng.integers(0, 256, 32, dtype=np.uint8))
            response = wire.AccessResponseUser(
                tag=h_items(guess, msg.tid, msg.ephemeral, msg.signal, ts), ts=ts
            )
            net.send(self.name, frame.origin or src, net.to_frame(response), depth)
        elif isinstance(msg, wire.HandoverRequest):
            if msg.nsat_id != self.sat_id:
                net.send(self.name, net.station_names[msg.nsat_id], frame, depth)
                return
            guess = bytes(self.rng.integers(0, 256, 32, dtype=np.uint8))
            response = wire.HandoverResponse(
                tag=h_items(msg.tid, msg.nsat_id, guess, ts), ts=ts
            )
            net.send(self.name, frame.origin or src, net.to_frame(response), depth)


# -- the event loop --------------------------------------------------------


class Network:
    def __init__(self, params, policy: AdversaryPolicy, seed: int):
        self.params = params
        self.policy = policy
        self.clock = Clock(0)
        self.transcript = Transcript()
        self.parties: dict[str, Actor] = {}
        self.links: dict[frozenset, Link] = {}
        self.station_ids: dict[str, int] = {}
        self.station_names: dict[int, str] = {}
        self._heap: list = []
        self._counter = 0
        self._rngs: dict[str, np.random.Generator] = {}
        self._seed_root = np.random.SeedSequence(seed)

    def rng_for(self, name: str) -> np.random.Generator:
        if name not in self._rngs:
            stable = int.from_bytes(hashlib.sha256(name.encode()).digest()[:4], "big")
            child = np.random.SeedSequence(
                entropy=self._seed_root.entropy, spawn_key=(stable,)
            )
            self._rngs[name] = np.random.default_rng(child)
        return self._rngs[name]

    def add_party(self, actor: Actor, station_id: Optional[int] = None) -> None:
        self.parties[actor.name] = actor
        if station_id is not None:
            self.station_ids[actor.name] = station_id
            self.station_names[station_id] = actor.name

    def add_link(self, a: str, b: str, latency_ms: int = 10, secure: bool = False):
        self.links[frozenset((a, b))] = Link(a, b, latency_ms, secure)

    def _link(self, a: str, b: str) -> Link:
        link = self.links.get(frozenset((a, b)))
        if link is None:
            raise ProtocolError(f"no link between {a} and {b}")
        return link

    def to_frame(self, msg: wire.Message, origin: str = "") -> Frame:
        bits = wire.encode(msg, self.params.ring)
        return Frame(
            kind=type(msg).__name__,
            phase=msg.PHASE,
            bits=bits,
            origin=origin,
            account_bits=len(bits),
        )

    def from_frame(self, frame: Frame) -> wire.Message:
        try:
            return wire.decode(frame.bits, frame.kind, self.params.ring)
        except WireError as exc:
            raise RejectError("decode", str(exc)) from None

    def schedule(self, at: int, dst: str, payload, depth: int, src: str) -> None:
        self._counter += 1
        heapq.heappush(self._heap, (at, dst, self._counter, payload, depth, src))

    def schedule_action(self, at: int, party: str, action: str, **kwargs) -> None:
        self.schedule(at, party, ("action", action, kwargs), 0, party)

    def send(self, src: str, dst: str, frame: Frame, depth: int) -> None:
        link = self._link(src, dst)
        if not frame.origin:
            frame = replace(frame, origin=src)
        size = frame.account_bits
        self.transcript.add(
            time=self.clock.now, etype="send", party=src, peer=dst,
            kind=frame.kind, bits=size, depth=depth, detail=frame.phase,
        )
        arrival = self.clock.now + link.latency_ms
        if link.secure:
            self.schedule(arrival, dst, ("deliver", frame), depth + 1, src)
            return
        self.policy.observe(self.clock.now, src, dst, frame)
        rule = self.policy.match(frame, src, dst)
        if rule is None or rule.action in ("passthrough", "eavesdrop"):
            self.schedule(arrival, dst, ("deliver", frame), depth + 1, src)
        elif rule.action == "drop":
            self.transcript.add(
                time=self.clock.now, etype="drop", party=src, peer=dst,
                kind=frame.kind, bits=size, depth=depth,
            )
        elif rule.action == "replay":
            self.schedule(arrival, dst, ("deliver", frame), depth + 1, src)
            self.transcript.add(
                time=self.clock.now, etype="replay", party=src, peer=dst,
                kind=frame.kind, bits=size, depth=depth,
                detail=f"delay={rule.delay_ms}",
            )
            self.schedule(
                arrival + rule.delay_ms, dst, ("deliver", frame.copy()), depth + 1, src
            )
        elif rule.action == "tamper":
            flipped = frame.copy()
            if flipped.wrapped is not None:
                blob = bytearray(flipped.wrapped)
                for pos in rule.positions:
                    blob[pos // 8] ^= 1 << (pos % 8)
                flipped.wrapped = bytes(blob)
            else:
                for pos in rule.positions:
                    flipped.bits[pos] ^= 1
            self.transcript.add(
                time=self.clock.now, etype="tamper", party=src, peer=dst,
                kind=frame.kind, bits=size, depth=depth,
                detail=f"positions={len(rule.positions)}",
            )
            self.schedule(arrival, dst, ("deliver", flipped), depth + 1, src)
        elif rule.action == "inject":
            self.schedule(arrival, dst, ("deliver", frame), depth + 1, src)
            self.transcript.add(
                time=self.clock.now, etype="inject", party=src, peer=dst,
                kind=rule.frame.kind, bits=rule.frame.account_bits, depth=depth,
            )
            self.schedule(arrival, dst, ("deliver", rule.frame.copy()), depth + 1, src)
        else:
            raise ProtocolError(f"unknown adversary action {rule.action!r}")

    def run(self) -> Transcript:
        while self._heap:
            at, dst, _seq, payload, depth, src = heapq.heappop(self._heap)
            if at < self.clock.now:
                raise ProtocolError("event scheduled in the past")
            self.clock.now = at
            actor = self.parties[dst]
            try:
                if payload[0] == "action":
                    _, action, kwargs = payload
                    actor.perform(self, action, depth, **kwargs)
                else:
                    frame = payload[1]
                    self.transcript.add(
                        time=at, etype="recv", party=dst, peer=src,
                        kind=frame.kind, bits=frame.account_bits, depth=depth,
                    )
                    actor.receive(self, frame, src, depth)
            except RejectError as exc:
                self.transcript.add(
                    time=at, etype="reject", party=dst, peer=src,
                    kind=payload[1].kind if payload[0] == "deliver" else "action",
                    bits=0, depth=depth, detail=exc.reason,
                )
            except LoginError:
                self.transcript.add(
                    time=at, etype="reject", party=dst, peer=src,
                    kind="login", bits=0, depth=depth, detail="ver",
                )
        return self.transcript
