"""Party state machines for every protocol phase.

Phases: system initialisation, station and user registration (secure
channel), satellite-station pre-negotiation, three-factor login plus
access authentication, relay handover, and offline credential update.

Construction notes that every party relies on:

* one canonical hash tupling (see ``hashing``), so independently computed
  digests agree across parties;
* the temporary identity masks the true identity everywhere on the air;
* width adapters: an n-bit reconciled string is first compressed by the
  kdf, then truncated or counter-expanded to the width of whatever it
  masks;
* every receiver checks message freshness before touching any lattice
  arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import bitops, fuzzy, kex, wire
from .hashing import canonical_bytes, expand_mask, h_items, trunc_int
from .params import RingParams, get_profile
from .ring import Ring, RingElement, get_ring


class ProtocolError(Exception):
    pass


class RejectError(ProtocolError):
    """A verification failed; ``reason`` names the exact check."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {detail}" if detail else reason)


class LoginError(ProtocolError):
    """Uniform three-factor failure; deliberately carries no detail."""

    def __init__(self):
        super().__init__("login failed")


class RegistrationError(ProtocolError):
    pass


@dataclass
class Clock:
    """Virtual clock, millisecond resolution, monotone within a run."""

    now: int = 0

    def advance(self, ms: int) -> None:
        if ms < 0:
            raise ValueError("clock cannot go backwards")
        self.now += ms


@dataclass(frozen=True)
class SystemParams:
    """Published system-wide material; identical at every party."""

    ring: Ring
    public_element: RingElement
    id_bits: int = wire.ID_BITS
    ts_bits: int = wire.TS_BITS
    hash_bits: int = wire.HASH_BITS
    freshness_ms: int = 200

    @property
    def ring_bits(self) -> int:
        return self.ring.params.n * self.ring.params.coeff_bits


def require_fresh(params: SystemParams, clock: Clock, ts: int) -> None:
    if not (0 <= clock.now - ts <= params.freshness_ms):
        raise RejectError("timestamp", f"ts={ts} now={clock.now}")


# -- directory / NCC -----------------------------------------------------


@dataclass(frozen=True)
class DirectoryEntry:
    pk: RingElement
    expires: int


@dataclass
class NccState:
    master_key: RingElement  # never serialised into any message
    directory: dict[int, DirectoryEntry] = field(default_factory=dict)


def system_init(
    profile: str | RingParams, rng: np.random.Generator, freshness_ms: int = 200
) -> tuple[SystemParams, NccState]:
    ring_params = get_profile(profile) if isinstance(profile, str) else profile
    ring = get_ring(ring_params)
    public_element = ring.sample_gaussian(rng)
    master_key = ring.sample_gaussian(rng)
    return (
        SystemParams(ring=ring, public_element=public_element, freshness_ms=freshness_ms),
        NccState(master_key=master_key),
    )


def ncc_register_station(
    ncc: NccState,
    params: SystemParams,
    station_id: int,
    pk: RingElement,
    expires: int,
    clock: Clock,
) -> tuple[DirectoryEntry, bytes]:
    """Publish a station key; hand back the shared epoch token (securely)."""
    existing = ncc.directory.get(station_id)
    if existing is not None and existing.expires > clock.now:
        raise RegistrationError(f"station id {station_id} still registered")
    entry = DirectoryEntry(pk=pk, expires=expires)
    ncc.directory[station_id] = entry
    token = h_items(ncc.master_key, expires)
    return entry, token


# -- station states ------------------------------------------------------


@dataclass
class UserRecord:
    pk: RingElement
    cred: bytes
    access_cred: bytes
    reg_key: np.ndarray  # reconciled bits from the registration exchange


@dataclass
class SatLinkRecord:
    channel_key: bytes
    verify_key_issued: bool


@dataclass
class TcsState:
    tcs_id: int
    keys: kex.KeyPair
    master_secret: bytes
    ncc_token: bytes
    expires: int
    users: dict[int, UserRecord] = field(default_factory=dict)
    sat_links: dict[int, SatLinkRecord] = field(default_factory=dict)

    @property
    def verify_key(self) -> bytes:
        """Epoch-bound user-verification key handed to satellites."""
        return h_items(self.master_secret, self.expires)


@dataclass
class SatelliteState:
    sat_id: int
    keys: kex.KeyPair
    ncc_token: bytes
    tcs_id: Optional[int] = None
    channel_key: Optional[bytes] = None
    verify_key: Optional[bytes] = None


def create_tcs(
    params: SystemParams,
    ncc: NccState,
    tcs_id: int,
    expires: int,
    clock: Clock,
    rng: np.random.Generator,
) -> TcsState:
    keys = kex.keygen(params.ring, params.public_element, rng)
    _, token = ncc_register_station(ncc, params, tcs_id, keys.pk, expires, clock)
    master_secret = h_items(tcs_id, keys.pk, keys.sk)
    return TcsState(
        tcs_id=tcs_id,
        keys=keys,
        master_secret=master_secret,
        ncc_token=token,
        expires=expires,
    )


def create_satellite(
    params: SystemParams,
    ncc: NccState,
    sat_id: int,
    expires: int,
    clock: Clock,
    rng: np.random.Generator,
) -> SatelliteState:
    keys = kex.keygen(params.ring, params.public_element, rng)
    _, token = ncc_register_station(ncc, params, sat_id, keys.pk, expires, clock)
    return SatelliteState(sat_id=sat_id, keys=keys, ncc_token=token)


# -- user registration ---------------------------------------------------


@dataclass
class UserRegState:
    user_id: int
    keys: kex.KeyPair
    sigma: bytes
    helper: fuzzy.BioHelper
    masked_pw: bytes


@dataclass(frozen=True)
class DeviceVault:
    """At-rest device record; holds no factor and no unmasked secret.

    ``params`` is runtime context (which deployment the vault belongs
    to), not a stored secret; the six fields above it are the wire form.
    """

    masked_tid: int
    masked_cred: bytes
    masked_access_cred: bytes
    masked_sk: np.ndarray
    verifier: bytes
    bio_helper: fuzzy.BioHelper
    params: SystemParams

    def __post_init__(self):
        self.masked_sk.setflags(write=False)


@dataclass
class PendingAuth:
    tcs_id: int
    tcs_pk: RingElement
    ephemeral: RingElement
    signal: np.ndarray
    key_bits: np.ndarray
    user_tag: bytes
    access_proof: bytes
    ts: int


@dataclass
class PendingHandover:
    tid: int
    nsat_id: int
    nonce: RingElement
    ts: int


@dataclass
class UserSession:
    """Unlocked secrets; exists only between login and session end."""

    tid: int
    cred: bytes
    access_cred: bytes
    sk: RingElement
    pk: RingElement
    params: SystemParams
    pending_auth: Optional[PendingAuth] = None
    pending_handover: Optional[PendingHandover] = None


def user_register_begin(
    params: SystemParams,
    user_id: int,
    password: str,
    biometric: np.ndarray,
    rng: np.random.Generator,
) -> tuple[wire.RegRequest, UserRegState]:
    extract = fuzzy.gen(biometric, rng)
    masked_pw = h_items(password, extract.sigma)
    keys = kex.keygen(params.ring, params.public_element, rng)
    request = wire.RegRequest(user_id=user_id, masked_pw=masked_pw, pk=keys.pk)
    state = UserRegState(
        user_id=user_id,
        keys=keys,
        sigma=extract.sigma,
        helper=extract.helper,
        masked_pw=masked_pw,
    )
    return request, state


def tcs_register_user(
    tcs: TcsState, params: SystemParams, request: wire.RegRequest, rng: np.random.Generator
) -> wire.RegResponse:
    while True:
        share = kex.initiate(params.ring, request.pk, tcs.keys.sk, rng)
        reg_key = kex.kdf(share.key)
        tid = request.user_id ^ trunc_int(reg_key, params.id_bits)
        if tid not in tcs.users:
            break
    cred = h_items(tid, request.pk, tcs.keys.sk)
    access_cred = h_items(tid, tcs.verify_key)
    masked_tid = tid ^ trunc_int(h_items(request.user_id, request.masked_pw), params.id_bits)
    masked_cred = bitops.xor_bytes(cred, request.masked_pw)
    masked_access_cred = bitops.xor_bytes(access_cred, h_items(tid, cred))
    vault_key = h_items(tid, cred, access_cred)
    tcs.users[tid] = UserRecord(
        pk=request.pk, cred=cred, access_cred=access_cred, reg_key=share.key
    )
    return wire.RegResponse(
        masked_tid=masked_tid,
        masked_cred=masked_cred,
        masked_access_cred=masked_access_cred,
        vault_key=vault_key,
    )


def user_register_finish(
    state: UserRegState, params: SystemParams, response: wire.RegResponse
) -> DeviceVault:
    masked_sk = bitops.xor_bits(
        state.keys.sk.pack_bits(), expand_mask(response.vault_key, params.ring_bits)
    )
    tid = response.masked_tid ^ trunc_int(
        h_items(state.user_id, state.masked_pw), params.id_bits
    )
    verifier = h_items(tid, response.masked_tid, response.masked_cred, state.keys.sk)
    return DeviceVault(
        masked_tid=response.masked_tid,
        masked_cred=response.masked_cred,
        masked_access_cred=response.masked_access_cred,
        masked_sk=masked_sk,
        verifier=verifier,
        bio_helper=state.helper,
        params=params,
    )


def _unlock(
    vault: DeviceVault, user_id: int, password: str, biometric: np.ndarray
) -> tuple[int, bytes, bytes, RingElement]:
    """Shared three-factor recompute; raises the uniform LoginError."""
    params = vault.params
    try:
        sigma = fuzzy.rep(biometric, vault.bio_helper)
    except fuzzy.BioMatchError:
        raise LoginError() from None
    masked_pw = h_items(password, sigma)
    tid = vault.masked_tid ^ trunc_int(h_items(user_id, masked_pw), params.id_bits)
    cred = bitops.xor_bytes(vault.masked_cred, masked_pw)
    access_cred = bitops.xor_bytes(vault.masked_access_cred, h_items(tid, cred))
    sk_bits = bitops.xor_bits(
        vault.masked_sk, expand_mask(h_items(tid, cred, access_cred), params.ring_bits)
    )
    try:
        sk = params.ring.unpack_bits(sk_bits)
    except ValueError:
        raise LoginError() from None
    if vault.verifier != h_items(tid, vault.masked_tid, vault.masked_cred, sk):
        raise LoginError()
    return tid, cred, access_cred, sk


def user_login(
    vault: DeviceVault, user_id: int, password: str, biometric: np.ndarray
) -> UserSession:
    tid, cred, access_cred, sk = _unlock(vault, user_id, password, biometric)
    pk = kex.public_key_for(vault.params.ring, vault.params.public_element, sk)
    return UserSession(
        tid=tid, cred=cred, access_cred=access_cred, sk=sk, pk=pk, params=vault.params
    )


# -- pre-negotiation -----------------------------------------------------


def _token_mask(params: SystemParams, token: bytes, ts: int) -> RingElement:
    """Ring-valued hash of (epoch token, timestamp), masks station keys."""
    return params.ring.hash_to_ring(canonical_bytes(token, ts))


def satellite_preneg_begin(
    sat: SatelliteState, params: SystemParams, clock: Clock
) -> wire.PreNegRequest:
    ts = clock.now
    masked_pk = params.ring.add(sat.keys.pk, _token_mask(params, sat.ncc_token, ts))
    tag = h_items(sat.sat_id, sat.keys.pk, masked_pk, ts)
    return wire.PreNegRequest(station_id=sat.sat_id, masked_pk=masked_pk, ts=ts, tag=tag)


def tcs_preneg_respond(
    tcs: TcsState,
    params: SystemParams,
    request: wire.PreNegRequest,
    clock: Clock,
    rng: np.random.Generator,
) -> tuple[wire.PreNegResponse, bytes]:
    require_fresh(params, clock, request.ts)
    peer_pk = params.ring.sub(
        request.masked_pk, _token_mask(params, tcs.ncc_token, request.ts)
    )
    if request.tag != h_items(request.station_id, peer_pk, request.masked_pk, request.ts):
        raise RejectError("a1", "pre-negotiation request tag mismatch")
    share = kex.initiate(params.ring, peer_pk, tcs.keys.sk, rng)
    ts = clock.now
    masked_verify_key = bitops.xor_bytes(kex.kdf(share.key), tcs.verify_key)
    tag = h_items(tcs.tcs_id, tcs.keys.pk, share.key, tcs.verify_key, ts)
    channel_key = h_items(tcs.tcs_id, request.station_id, share.key, ts)
    tcs.sat_links[request.station_id] = SatLinkRecord(
        channel_key=channel_key, verify_key_issued=True
    )
    response = wire.PreNegResponse(
        tcs_id=tcs.tcs_id,
        tcs_pk=tcs.keys.pk,
        signal=share.signal,
        ephemeral=share.ephemeral,
        masked_verify_key=masked_verify_key,
        ts=ts,
        tag=tag,
    )
    return response, channel_key


def satellite_preneg_finish(
    sat: SatelliteState,
    params: SystemParams,
    response: wire.PreNegResponse,
    clock: Clock,
    rng: np.random.Generator,
) -> tuple[bytes, bytes]:
    require_fresh(params, clock, response.ts)
    key_bits = kex.respond(
        params.ring, response.tcs_pk, sat.keys.sk, response.ephemeral, response.signal, rng
    )
    verify_key = bitops.xor_bytes(response.masked_verify_key, kex.kdf(key_bits))
    if response.tag != h_items(
        response.tcs_id, response.tcs_pk, key_bits, verify_key, response.ts
    ):
        raise RejectError("a2", "pre-negotiation response tag mismatch")
    channel_key = h_items(response.tcs_id, sat.sat_id, key_bits, response.ts)
    sat.tcs_id = response.tcs_id
    sat.channel_key = channel_key
    sat.verify_key = verify_key
    return channel_key, verify_key


# -- access authentication ----------------------------------------------


def user_access_request(
    session: UserSession,
    tcs_id: int,
    tcs_pk: RingElement,
    clock: Clock,
    rng: np.random.Generator,
) -> wire.AccessRequest:
    params = session.params
    share = kex.initiate(params.ring, tcs_pk, session.sk, rng)
    ts = clock.now
    access_proof = h_items(session.access_cred, ts)
    user_tag = h_items(session.tid, tcs_id, session.cred, share.key)
    masked_tag = bitops.xor_bytes(access_proof, user_tag)
    tag = h_items(
        session.tid, tcs_id, share.ephemeral, share.signal, access_proof, masked_tag, ts
    )
    session.pending_auth = PendingAuth(
        tcs_id=tcs_id,
        tcs_pk=tcs_pk,
        ephemeral=share.ephemeral,
        signal=share.signal,
        key_bits=share.key,
        user_tag=user_tag,
        access_proof=access_proof,
        ts=ts,
    )
    return wire.AccessRequest(
        tid=session.tid,
        tcs_id=tcs_id,
        ephemeral=share.ephemeral,
        signal=share.signal,
        masked_tag=masked_tag,
        tag=tag,
        ts=ts,
    )


def satellite_handle_access(
    sat: SatelliteState, params: SystemParams, request: wire.AccessRequest, clock: Clock
) -> tuple[wire.AccessResponseUser, wire.AccessForwardTcs]:
    """Admit or reject the user with hashes only, then fan out both sends."""
    if sat.verify_key is None:
        raise RejectError("a4", "satellite has no verification key")
    require_fresh(params, clock, request.ts)
    access_proof = h_items(h_items(request.tid, sat.verify_key), request.ts)
    if request.tag != h_items(
        request.tid,
        request.tcs_id,
        request.ephemeral,
        request.signal,
        access_proof,
        request.masked_tag,
        request.ts,
    ):
        raise RejectError("a4", "access request tag mismatch")
    user_tag = bitops.xor_bytes(request.masked_tag, access_proof)
    ts = clock.now
    response = wire.AccessResponseUser(
        tag=h_items(user_tag, request.tid, request.ephemeral, request.signal, ts), ts=ts
    )
    forward = wire.AccessForwardTcs(
        tid=request.tid,
        ephemeral=request.ephemeral,
        signal=request.signal,
        user_tag=user_tag,
        ts=ts,
    )
    return response, forward


def user_access_finish(
    session: UserSession, response: wire.AccessResponseUser, clock: Clock
) -> bytes:
    params = session.params
    pending = session.pending_auth
    if pending is None:
        raise ProtocolError("no pending access handshake")
    require_fresh(params, clock, response.ts)
    expected = h_items(
        pending.user_tag, session.tid, pending.ephemeral, pending.signal, response.ts
    )
    if response.tag != expected:
        raise RejectError("a5", "station response tag mismatch")
    key = h_items(session.tid, pending.tcs_id, session.pk, pending.tcs_pk, pending.key_bits)
    session.pending_auth = None
    return key


def tcs_access_finish(
    tcs: TcsState,
    params: SystemParams,
    forward: wire.AccessForwardTcs,
    clock: Clock,
    rng: np.random.Generator,
) -> bytes:
    require_fresh(params, clock, forward.ts)
    record = tcs.users.get(forward.tid)
    if record is None:
        raise RejectError("tid", "unknown temporary identity")
    key_bits = kex.respond(
        params.ring, record.pk, tcs.keys.sk, forward.ephemeral, forward.signal, rng
    )
    if forward.user_tag != h_items(forward.tid, tcs.tcs_id, record.cred, key_bits):
        raise RejectError("HP", "user tag mismatch")
    return h_items(forward.tid, tcs.tcs_id, record.pk, tcs.keys.pk, key_bits)


# -- handover ------------------------------------------------------------


def user_handover_request(
    session: UserSession, nsat_id: int, clock: Clock, rng: np.random.Generator
) -> wire.HandoverRequest:
    params = session.params
    nonce = params.ring.sample_gaussian(rng)
    ts = clock.now
    access_proof = h_items(session.access_cred, ts)
    masked_proof = bitops.xor_bytes(access_proof, h_items(nonce, ts))
    tag = h_items(session.tid, nsat_id, masked_proof, access_proof, ts)
    session.pending_handover = PendingHandover(
        tid=session.tid, nsat_id=nsat_id, nonce=nonce, ts=ts
    )
    return wire.HandoverRequest(
        tid=session.tid, nsat_id=nsat_id, masked_proof=masked_proof, tag=tag, ts=ts
    )


def nsat_verify_handover(
    sat: SatelliteState, params: SystemParams, request: wire.HandoverRequest, clock: Clock
) -> bytes:
    """Verification path: exactly three hash evaluations, no per-user state."""
    if sat.verify_key is None:
        raise RejectError("a6", "satellite has no verification key")
    require_fresh(params, clock, request.ts)
    access_proof = h_items(h_items(request.tid, sat.verify_key), request.ts)
    if request.tag != h_items(
        request.tid, request.nsat_id, request.masked_proof, access_proof, request.ts
    ):
        raise RejectError("a6", "handover request tag mismatch")
    return access_proof


def nsat_handle_handover(
    sat: SatelliteState, params: SystemParams, request: wire.HandoverRequest, clock: Clock
) -> wire.HandoverResponse:
    access_proof = nsat_verify_handover(sat, params, request, clock)
    ts = clock.now
    tag = h_items(
        request.tid,
        request.nsat_id,
        bitops.xor_bytes(request.masked_proof, access_proof),
        ts,
    )
    return wire.HandoverResponse(tag=tag, ts=ts)


def user_handover_finish(
    session: UserSession, response: wire.HandoverResponse, clock: Clock
) -> None:
    pending = session.pending_handover
    if pending is None:
        raise ProtocolError("no pending handover")
    require_fresh(session.params, clock, response.ts)
    expected = h_items(
        pending.tid, pending.nsat_id, h_items(pending.nonce, pending.ts), response.ts
    )
    if response.tag != expected:
        raise RejectError("a7", "handover response tag mismatch")
    session.pending_handover = None


# -- credential update ---------------------------------------------------


def update_credentials(
    vault: DeviceVault,
    user_id: int,
    old_password: str,
    old_biometric: np.ndarray,
    new_password: str,
    new_biometric: np.ndarray,
    rng: np.random.Generator,
) -> DeviceVault:
    """Offline re-masking under fresh factors; fails atomically."""
    tid, cred, access_cred, sk = _unlock(vault, user_id, old_password, old_biometric)
    extract = fuzzy.gen(new_biometric, rng)
    masked_pw = h_items(new_password, extract.sigma)
    masked_tid = tid ^ trunc_int(h_items(user_id, masked_pw), vault.params.id_bits)
    masked_cred = bitops.xor_bytes(cred, masked_pw)
    verifier = h_items(tid, masked_tid, masked_cred, sk)
    return replace(
        vault,
        masked_tid=masked_tid,
        masked_cred=masked_cred,
        verifier=verifier,
        bio_helper=extract.helper,
    )


# -- debug snapshots -----------------------------------------------------


def snapshot(state) -> str:
    """Text key-value dump of a party state for transcript assertions."""
    import hashlib

    def dig(value) -> str:
        if isinstance(value, bytes):
            return value.hex()[:16]
        if isinstance(value, RingElement):
            return hashlib.sha256(value.pack_bytes()).hexdigest()[:16]
        if isinstance(value, np.ndarray):
            return hashlib.sha256(value.tobytes()).hexdigest()[:16]
        return str(value)

    lines = [f"type={type(state).__name__}"]
    for name, value in sorted(vars(state).items()):
        if isinstance(value, dict):
            lines.append(f"{name}.count={len(value)}")
        elif isinstance(value, kex.KeyPair):
            lines.append(f"{name}.pk={dig(value.pk)}")
        elif value is None or isinstance(value, (int, str, bool)):
            lines.append(f"{name}={value}")
        else:
            lines.append(f"{name}={dig(value)}")
    return "\n".join(lines)
