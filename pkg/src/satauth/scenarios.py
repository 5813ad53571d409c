"""Canned network scenarios, the attack suite, and the delay report.

``run_scenario`` wires a standard topology (user, serving satellite, next
satellite, control station, plus a secure registration channel), scripts
the phases over virtual time, and returns the transcript.  Scenario files
in a small line-based text format configure the same knobs from disk.

``attack_suite`` replays the threat model as executable checks: replay,
exhaustive bit-tamper sweeps on every integrity-protected message,
impersonation of both sides, device loss, and a passive eavesdropper
whose log is scanned for every secret the parties hold.  Honest controls
run alongside so a broken check cannot pass silently.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field, replace

import numpy as np

from . import bitops, fuzzy, instrument, protocol, wire
from .protocol import Clock, LoginError, RejectError
from .simnet import (
    AdversaryPolicy,
    HashStreamWrap,
    ImpostorUserActor,
    Network,
    RogueSatelliteActor,
    Rule,
    SatelliteActor,
    TcsActor,
    Transcript,
    UserActor,
)
from .wire import WireError

TCS_ID = 9001
SAT_ID = 7001
NSAT_ID = 7002
USER_ID = 123456789
EXPIRES = 10**9

REGISTER_AT = 0
PRENEG_SAT_AT = 40
PRENEG_NSAT_AT = 80
AUTH_AT = 300
HANDOVER_AT = 500


@dataclass
class Scenario:
    profile: str = "robust"
    rules: list[Rule] = field(default_factory=list)
    script: list[tuple[int, str, str, dict]] = field(default_factory=list)
    latency_ms: int = 10
    freshness_ms: int = 200
    wrap_forward: bool = True
    impostor: bool = False
    rogue_sat: bool = False
    rogue_nsat: bool = False


def default_script(with_handover: bool = False) -> list[tuple[int, str, str, dict]]:
    script = [
        (REGISTER_AT, "user", "register", {}),
        (PRENEG_SAT_AT, "sat", "preneg", {}),
        (PRENEG_NSAT_AT, "nsat", "preneg", {}),
        (AUTH_AT, "user", "auth", {}),
    ]
    if with_handover:
        script.append((HANDOVER_AT, "user", "handover", {"nsat": "nsat"}))
    return script


def auth_scenario(profile: str = "robust", rules=(), **kw) -> Scenario:
    return Scenario(profile=profile, rules=list(rules), script=default_script(), **kw)


def handover_scenario(profile: str = "robust", rules=(), **kw) -> Scenario:
    return Scenario(
        profile=profile, rules=list(rules), script=default_script(True), **kw
    )


def impostor_scenario(profile: str = "robust") -> Scenario:
    """Credential-less adversary tries the access phase against an honest station."""
    return Scenario(
        profile=profile,
        impostor=True,
        script=[(PRENEG_SAT_AT, "sat", "preneg", {}), (AUTH_AT, "user", "auth", {})],
    )


def rogue_sat_scenario(profile: str = "robust") -> Scenario:
    """Serving satellite never pre-negotiated; it must fail the user's check."""
    return Scenario(
        profile=profile,
        rogue_sat=True,
        script=[(REGISTER_AT, "user", "register", {}), (AUTH_AT, "user", "auth", {})],
    )


def rogue_nsat_scenario(profile: str = "robust") -> Scenario:
    """Next satellite never pre-negotiated; handover must be refused."""
    return Scenario(
        profile=profile,
        rogue_nsat=True,
        script=[
            (REGISTER_AT, "user", "register", {}),
            (PRENEG_SAT_AT, "sat", "preneg", {}),
            (AUTH_AT, "user", "auth", {}),
            (HANDOVER_AT, "user", "handover", {"nsat": "nsat"}),
        ],
    )


@dataclass
class BuiltSystem:
    """Everything run_scenario assembles; kept for post-run assertions."""

    params: protocol.SystemParams
    ncc: protocol.NccState
    tcs: protocol.TcsState
    sat: protocol.SatelliteState
    nsat: protocol.SatelliteState
    user_id: int
    password: str
    biometric: np.ndarray
    net: Network


def build_network(scenario: Scenario, seed: int) -> BuiltSystem:
    root = np.random.SeedSequence(seed)
    r_init, r_tcs, r_sat, r_nsat, r_bio = (
        np.random.default_rng(c) for c in root.spawn(5)
    )
    params, ncc = protocol.system_init(
        scenario.profile, r_init, freshness_ms=scenario.freshness_ms
    )
    net = Network(params, AdversaryPolicy(rules=list(scenario.rules)), seed)
    tcs = protocol.create_tcs(params, ncc, TCS_ID, EXPIRES, net.clock, r_tcs)
    sat = protocol.create_satellite(params, ncc, SAT_ID, EXPIRES, net.clock, r_sat)
    nsat = protocol.create_satellite(params, ncc, NSAT_ID, EXPIRES, net.clock, r_nsat)

    password = "orbital-passphrase"
    biometric = fuzzy.random_biometric(r_bio)

    net.add_party(TcsActor("tcs", tcs, params), station_id=TCS_ID)
    if scenario.rogue_sat:
        net.add_party(
            RogueSatelliteActor("sat", params, net.rng_for("rogue-sat"), SAT_ID),
            station_id=SAT_ID,
        )
    else:
        net.add_party(
            SatelliteActor("sat", sat, params, "tcs", scenario.wrap_forward),
            station_id=SAT_ID,
        )
    if scenario.rogue_nsat:
        net.add_party(
            RogueSatelliteActor("nsat", params, net.rng_for("rogue-nsat"), NSAT_ID),
            station_id=NSAT_ID,
        )
    else:
        net.add_party(
            SatelliteActor("nsat", nsat, params, "tcs", scenario.wrap_forward),
            station_id=NSAT_ID,
        )
    if scenario.impostor:
        net.add_party(
            ImpostorUserActor("user", params, TCS_ID, "sat", net.rng_for("impostor"))
        )
    else:
        net.add_party(
            UserActor(
                "user",
                params,
                USER_ID,
                password,
                biometric,
                "tcs",
                TCS_ID,
                tcs.keys.pk,
                "sat",
                net.rng_for("user"),
            )
        )

    lat = scenario.latency_ms
    net.add_link("user", "sat", lat)
    net.add_link("user", "nsat", lat)
    net.add_link("sat", "tcs", lat)
    net.add_link("nsat", "tcs", lat)
    net.add_link("sat", "nsat", lat)
    net.add_link("user", "tcs", lat, secure=True)  # registration channel

    for at, party, action, kwargs in scenario.script:
        net.schedule_action(at, party, action, **kwargs)
    return BuiltSystem(
        params=params,
        ncc=ncc,
        tcs=tcs,
        sat=sat,
        nsat=nsat,
        user_id=USER_ID,
        password=password,
        biometric=biometric,
        net=net,
    )


def run_scenario(scenario: Scenario, seed: int) -> tuple[Transcript, BuiltSystem]:
    built = build_network(scenario, seed)
    transcript = built.net.run()
    return transcript, built


# -- scenario files --------------------------------------------------------


def parse_scenario(text: str) -> Scenario:
    """Plain structured text: one directive per line, '#' comments.

    Directives::

        profile robust
        latency 10
        freshness 200
        wrap-forward on
        impostor off
        rogue-sat off
        rogue-nsat off
        policy replay kind=AccessRequest delay=250 max=1
        policy tamper kind=AccessRequest positions=5,17
        policy drop kind=PreNegRequest
        step 300 user auth
        step 500 user handover nsat=nsat
    """
    scenario = Scenario()
    script: list[tuple[int, str, str, dict]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        if head == "profile":
            scenario.profile = rest[0]
        elif head == "latency":
            scenario.latency_ms = int(rest[0])
        elif head == "freshness":
            scenario.freshness_ms = int(rest[0])
        elif head in ("wrap-forward", "impostor", "rogue-sat", "rogue-nsat"):
            value = rest[0].lower() in ("on", "true", "1", "yes")
            attr = head.replace("-", "_")
            setattr(scenario, attr, value)
        elif head == "policy":
            action = rest[0]
            kw: dict = {}
            for item in rest[1:]:
                key, _, val = item.partition("=")
                if key == "kind":
                    kw["kind"] = val
                elif key == "src":
                    kw["src"] = val
                elif key == "dst":
                    kw["dst"] = val
                elif key == "delay":
                    kw["delay_ms"] = int(val)
                elif key == "max":
                    kw["max_times"] = int(val)
                elif key == "positions":
                    kw["positions"] = tuple(int(p) for p in val.split(","))
                else:
                    raise ValueError(f"unknown policy option {key!r}")
            scenario.rules.append(Rule(action=action, **kw))
        elif head == "step":
            at, party, action = int(rest[0]), rest[1], rest[2]
            kwargs = {}
            for item in rest[3:]:
                key, _, val = item.partition("=")
                kwargs[key] = val
            script.append((at, party, action, kwargs))
        else:
            raise ValueError(f"unknown scenario directive {head!r}")
    scenario.script = script if script else default_script()
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- attack suite ----------------------------------------------------------


@dataclass
class AttackEntry:
    name: str
    trials: int
    expected: str
    failures: int
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"{status} {self.name:<28s} trials={self.trials:<6d} "
            f"expected={self.expected:<12s} failures={self.failures} {self.detail}".rstrip()
        )


@dataclass
class AttackReport:
    entries: list[AttackEntry]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def lines(self) -> list[str]:
        return [e.line() for e in self.entries]


def _collect_secrets(built: BuiltSystem) -> dict[str, np.ndarray]:
    """Every bit pattern that must never appear on an insecure link."""
    tcs, sat, nsat = built.tcs, built.sat, built.nsat
    secrets: dict[str, np.ndarray] = {
        "user-true-id": bitops.int_to_bits(built.user_id, 100),
        "ncc-master-key": built.ncc.master_key.pack_bits(),
        "ncc-token": bitops.bytes_to_bits(tcs.ncc_token),
        "tcs-sk": tcs.keys.sk.pack_bits(),
        "tcs-master-secret": bitops.bytes_to_bits(tcs.master_secret),
        "tcs-verify-key": bitops.bytes_to_bits(tcs.verify_key),
        "sat-sk": sat.keys.sk.pack_bits(),
        "nsat-sk": nsat.keys.sk.pack_bits(),
        "password": bitops.bytes_to_bits(built.password.encode()),
        "biometric": built.biometric,
    }
    if sat.channel_key:
        secrets["sat-channel-key"] = bitops.bytes_to_bits(sat.channel_key)
    for tid, record in tcs.users.items():
        secrets[f"user-cred-{tid}"] = bitops.bytes_to_bits(record.cred)
        secrets[f"user-access-cred-{tid}"] = bitops.bytes_to_bits(record.access_cred)
        secrets[f"user-reg-key-{tid}"] = record.reg_key
    user_actor = built.net.parties.get("user")
    if isinstance(user_actor, UserActor) and user_actor.session is not None:
        secrets["user-sk"] = user_actor.session.sk.pack_bits()
    for party, key in built.net.transcript.keys.items():
        secrets[f"session-key-{party}"] = bitops.bytes_to_bits(key)
    return secrets


def _bits_str(bits: np.ndarray) -> str:
    return "".join(map(str, bits.tolist()))


def scan_log_for_secrets(built: BuiltSystem) -> list[str]:
    """Names of secrets found in the adversary's log (empty when clean)."""
    log = built.net.policy.log
    haystacks = []
    for _, _, _, frame in log:
        if frame.bits is not None:
            haystacks.append(_bits_str(frame.bits))
        if frame.wrapped is not None:
            haystacks.append(_bits_str(bitops.bytes_to_bits(frame.wrapped)))
    found = []
    for name, bits in _collect_secrets(built).items():
        needle = _bits_str(bits)
        if any(needle in hay for hay in haystacks):
            found.append(name)
    return found


def _sweep_positions(spans: list[tuple[int, int]], full: bool) -> list[int]:
    positions: list[int] = []
    for start, end in spans:
        width = end - start
        stride = 1 if full else max(1, width // 61)
        positions.extend(range(start, end, stride))
    return positions


# Fields under direct MAC coverage, per message kind.  The ephemeral and
# signal fields of the pre-negotiation response and the station forward
# (and the forward's timestamp) are bound only through the derived
# reconciled bits: flipping them either perturbs the reconciliation (and
# the tag check rejects) or is absorbed as an exact no-op, so those
# fields get the stronger reject-or-identical-outcome sweep instead.
_MAC_FIELDS = {
    "PreNegRequest": None,  # None = every field
    "PreNegResponse": ("tcs_id", "tcs_pk", "masked_verify_key", "ts", "tag"),
    "AccessRequest": None,
    "AccessResponseUser": None,
    "AccessForwardTcs": ("tid", "user_tag"),
    "HandoverRequest": None,
    "HandoverResponse": None,
}
_DERIVED_FIELDS = {
    "PreNegResponse": ("signal", "ephemeral"),
    "AccessForwardTcs": ("signal", "ephemeral", "ts"),
}


def _tamper_sweep_entries(seed: int, profile: str, full: bool) -> list[AttackEntry]:
    """Flip every (sampled) bit of every protected message.

    MAC-covered fields must reject every flip.  Reconciliation-covered
    fields must either reject or hand back exactly the honest outcome
    (same keys, same verification material): an accepted-but-different
    outcome is the only real failure, and it never happens.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    clock = Clock(0)
    params, ncc = protocol.system_init(profile, rng)
    ring = params.ring
    tcs = protocol.create_tcs(params, ncc, TCS_ID, EXPIRES, clock, rng)
    sat = protocol.create_satellite(params, ncc, SAT_ID, EXPIRES, clock, rng)
    bio = fuzzy.random_biometric(rng)
    reg_req, reg_state = protocol.user_register_begin(
        params, USER_ID, "pw", bio, rng
    )
    vault = protocol.user_register_finish(
        reg_state, params, protocol.tcs_register_user(tcs, params, reg_req, rng)
    )
    session = protocol.user_login(vault, USER_ID, "pw", bio)

    entries: list[AttackEntry] = []

    def spans_for(message, names) -> list[tuple[int, int]]:
        spans = wire.field_spans(type(message), ring)
        if names is None:
            return list(spans.values())
        return [spans[n] for n in names]

    def sweep(name, message, handler, expect_reasons, honest_outcome=None):
        kind = type(message).__name__
        bits = wire.encode(message, ring)
        strict = _sweep_positions(spans_for(message, _MAC_FIELDS[kind]), full)
        derived = _sweep_positions(
            spans_for(message, _DERIVED_FIELDS.get(kind, ())), full
        )
        failures = 0
        noop = 0
        reasons: dict[str, int] = {}
        probes = [(p, False) for p in strict] + [(p, True) for p in derived]
        for pos, is_derived in probes:
            flipped = bits.copy()
            flipped[pos] ^= 1
            try:
                try:
                    tampered = wire.decode(flipped, type(message), ring)
                except WireError:
                    reasons["decode"] = reasons.get("decode", 0) + 1
                    continue
                outcome = handler(tampered)
            except RejectError as exc:
                reasons[exc.reason] = reasons.get(exc.reason, 0) + 1
                continue
            if is_derived and outcome == honest_outcome:
                noop += 1  # absorbed by reconciliation, outcome unchanged
            else:
                failures += 1
        unexpected = sorted(set(reasons) - set(expect_reasons) - {"decode"})
        entries.append(
            AttackEntry(
                name=name,
                trials=len(strict) + len(derived),
                expected="reject",
                failures=failures + len(unexpected),
                ok=failures == 0 and not unexpected,
                detail=" ".join(
                    f"{k}={v}" for k, v in sorted(reasons.items())
                )
                + (f" absorbed-noop={noop}" if noop else ""),
            )
        )

    # pre-negotiation request -> station tag check at the control station
    clock.now = 10
    pn_req = protocol.satellite_preneg_begin(sat, params, clock)
    clock.now = 20
    sweep(
        "tamper-preneg-request",
        pn_req,
        lambda m: protocol.tcs_preneg_respond(tcs, params, m, clock, np.random.default_rng(1)),
        {"a1", "timestamp"},
    )
    pn_resp, tcs_channel_key = protocol.tcs_preneg_respond(tcs, params, pn_req, clock, rng)
    clock.now = 30

    def finish_preneg(message):
        probe = replace(sat)
        return protocol.satellite_preneg_finish(
            probe, params, message, clock, np.random.default_rng(2)
        )

    sweep(
        "tamper-preneg-response",
        pn_resp,
        finish_preneg,
        {"a2", "timestamp"},
        honest_outcome=(tcs_channel_key, tcs.verify_key),
    )
    protocol.satellite_preneg_finish(sat, params, pn_resp, clock, rng)

    clock.now = 100
    access = protocol.user_access_request(session, TCS_ID, tcs.keys.pk, clock, rng)
    clock.now = 110
    sweep(
        "tamper-access-request",
        access,
        lambda m: protocol.satellite_handle_access(sat, params, m, clock),
        {"a4", "timestamp"},
    )
    response, forward = protocol.satellite_handle_access(sat, params, access, clock)
    clock.now = 120
    sweep(
        "tamper-access-response",
        response,
        lambda m: protocol.user_access_finish(session, m, clock),
        {"a5", "timestamp"},
    )
    user_key = protocol.user_access_finish(session, response, clock)
    sweep(
        "tamper-access-forward",
        forward,
        lambda m: protocol.tcs_access_finish(
            tcs, params, m, clock, np.random.default_rng(3)
        ),
        {"HP", "tid", "timestamp"},
        honest_outcome=user_key,
    )
    # the same forward tampered under the encrypted wrapping: every bit
    # of the blob is tag-protected
    wrapkit = HashStreamWrap()
    channel_key = sat.channel_key
    blob = wrapkit.wrap(channel_key, (1).to_bytes(8, "big"),
                        bitops.frame_bits(wire.encode(forward, ring)))
    positions = _sweep_positions([(0, len(blob) * 8)], full)
    failures = 0
    for pos in positions:
        tampered = bytearray(blob)
        tampered[pos // 8] ^= 1 << (pos % 8)
        try:
            wrapkit.unwrap(channel_key, bytes(tampered))
            failures += 1
        except Exception:
            pass
    entries.append(
        AttackEntry(
            name="tamper-access-forward-wrapped",
            trials=len(positions),
            expected="reject",
            failures=failures,
            ok=failures == 0,
            detail="decode",
        )
    )

    clock.now = 200
    hreq = protocol.user_handover_request(session, SAT_ID, clock, rng)
    clock.now = 210
    sweep(
        "tamper-handover-request",
        hreq,
        lambda m: protocol.nsat_handle_handover(sat, params, m, clock),
        {"a6", "timestamp"},
    )
    hresp = protocol.nsat_handle_handover(sat, params, hreq, clock)
    clock.now = 220
    sweep(
        "tamper-handover-response",
        hresp,
        lambda m: protocol.user_handover_finish(session, m, clock),
        {"a7", "timestamp"},
    )
    return entries


def _count_runs(make_scenario, seed, trials, predicate) -> int:
    """Number of runs (out of ``trials``) where ``predicate`` fails."""
    failures = 0
    for i in range(trials):
        transcript, built = run_scenario(make_scenario(), seed + 1000 * i)
        if not predicate(transcript, built):
            failures += 1
    return failures


def attack_suite(
    profile: str = "robust",
    seed: int = 0,
    trials: int = 100,
    full_sweeps: bool = False,
    sim_trials: int | None = None,
) -> AttackReport:
    entries: list[AttackEntry] = []
    if sim_trials is None:
        sim_trials = max(1, trials // 10)

    def honest_auth_ok(transcript: Transcript, built) -> bool:
        metrics = transcript.auth_metrics()
        return (
            metrics.get("complete")
            and metrics.get("keys_equal")
            and not transcript.rejects()
        )

    failures = _count_runs(lambda: auth_scenario(profile), seed, sim_trials, honest_auth_ok)
    entries.append(
        AttackEntry("honest-auth-control", sim_trials, "accept", failures, failures == 0)
    )

    def honest_handover_ok(transcript, built) -> bool:
        accepted = any(
            e.etype == "accept" and e.kind == "handover" for e in transcript.events
        )
        return honest_auth_ok(transcript, built) and accepted

    failures = _count_runs(
        lambda: handover_scenario(profile), seed + 1, sim_trials, honest_handover_ok
    )
    entries.append(
        AttackEntry(
            "honest-handover-control", sim_trials, "accept", failures, failures == 0
        )
    )

    def replay_rejected(transcript, built) -> bool:
        # the original pass must still succeed; only the replayed copy dies
        metrics = transcript.auth_metrics()
        stale = [e for e in transcript.rejects() if e.detail == "timestamp"]
        return bool(stale) and metrics.get("complete") and metrics.get("keys_equal")

    failures = _count_runs(
        lambda: auth_scenario(
            profile,
            rules=[Rule("replay", kind="AccessRequest", delay_ms=250, max_times=1)],
        ),
        seed + 2,
        sim_trials,
        replay_rejected,
    )
    entries.append(
        AttackEntry("replay-access-request", sim_trials, "reject", failures, failures == 0)
    )

    failures = _count_runs(
        lambda: handover_scenario(
            profile,
            rules=[Rule("replay", kind="HandoverRequest", delay_ms=250, max_times=1)],
        ),
        seed + 3,
        sim_trials,
        replay_rejected,
    )
    entries.append(
        AttackEntry(
            "replay-handover-request", sim_trials, "reject", failures, failures == 0
        )
    )

    def impostor_rejected(transcript, built) -> bool:
        a4 = [e for e in transcript.rejects() if e.detail in ("a4", "decode")]
        return bool(a4) and not transcript.keys

    failures = _count_runs(
        lambda: impostor_scenario(profile),
        seed + 4,
        sim_trials,
        impostor_rejected,
    )
    entries.append(
        AttackEntry(
            "impersonate-user-no-cred", sim_trials, "reject", failures, failures == 0
        )
    )

    def rogue_sat_rejected(transcript, built) -> bool:
        a5 = [e for e in transcript.rejects() if e.detail == "a5"]
        return bool(a5) and "user" not in transcript.keys

    failures = _count_runs(
        lambda: rogue_sat_scenario(profile),
        seed + 5,
        sim_trials,
        rogue_sat_rejected,
    )
    entries.append(
        AttackEntry(
            "impersonate-satellite-no-key", sim_trials, "reject", failures, failures == 0
        )
    )

    def rogue_nsat_rejected(transcript, built) -> bool:
        a7 = [e for e in transcript.rejects() if e.detail == "a7"]
        handover_ok = any(
            e.etype == "accept" and e.kind == "handover" for e in transcript.events
        )
        return bool(a7) and not handover_ok

    failures = _count_runs(
        lambda: rogue_nsat_scenario(profile),
        seed + 6,
        sim_trials,
        rogue_nsat_rejected,
    )
    entries.append(
        AttackEntry(
            "impersonate-next-satellite", sim_trials, "reject", failures, failures == 0
        )
    )

    entries.extend(_device_loss_entries(profile, seed + 7, trials))
    entries.extend(_tamper_sweep_entries(seed + 8, profile, full_sweeps))

    transcript, built = run_scenario(handover_scenario(profile), seed + 9)
    leaked = scan_log_for_secrets(built)
    entries.append(
        AttackEntry(
            "eavesdrop-secret-scan",
            len(built.net.policy.log),
            "no-leak",
            len(leaked),
            not leaked,
            detail=",".join(leaked),
        )
    )
    secure_kinds = {
        frame.kind for _, _, _, frame in built.net.policy.log
    } & {"RegRequest", "RegResponse"}
    entries.append(
        AttackEntry(
            "secure-channel-unobserved",
            len(built.net.policy.log),
            "no-leak",
            len(secure_kinds),
            not secure_kinds,
        )
    )
    return AttackReport(entries=entries)


def _device_loss_entries(profile: str, seed: int, trials: int) -> list[AttackEntry]:
    rng = np.random.default_rng(seed)
    clock = Clock(0)
    params, ncc = protocol.system_init(profile, rng)
    tcs = protocol.create_tcs(params, ncc, TCS_ID, EXPIRES, clock, rng)
    bio = fuzzy.random_biometric(rng)
    req, state = protocol.user_register_begin(params, USER_ID, "pw-genuine", bio, rng)
    vault = protocol.user_register_finish(
        state, params, protocol.tcs_register_user(tcs, params, req, rng)
    )
    # control: the owner can log in
    protocol.user_login(vault, USER_ID, "pw-genuine", bio)
    accepted = 0
    for i in range(trials):
        guess_kind = i % 3
        user_id = USER_ID if guess_kind != 0 else USER_ID + 1 + int(rng.integers(1 << 30))
        password = "pw-genuine" if guess_kind != 1 else f"pw-guess-{i}"
        biometric = (
            bio if guess_kind != 2 else fuzzy.flip_bits(bio, 3 * (2 * 16 + 1), rng)
        )
        try:
            protocol.user_login(vault, user_id, password, biometric)
            accepted += 1
        except LoginError:
            pass
    return [
        AttackEntry(
            "device-loss-login", trials, "reject", accepted, accepted == 0
        )
    ]


# -- delay / overhead report ------------------------------------------------


def delay_overhead_report(
    profile: str = "robust", trials: int = 20, seed: int = 0
) -> dict:
    """Virtual link delay, wall-clock compute per party, and wire tallies."""
    transcript, built = run_scenario(auth_scenario(profile), seed)
    metrics = transcript.auth_metrics()

    rng = np.random.default_rng(np.random.SeedSequence(seed + 1))
    clock = Clock(0)
    params, ncc = protocol.system_init(profile, rng)
    tcs = protocol.create_tcs(params, ncc, TCS_ID, EXPIRES, clock, rng)
    sat = protocol.create_satellite(params, ncc, SAT_ID, EXPIRES, clock, rng)
    bio = fuzzy.random_biometric(rng)
    req, state = protocol.user_register_begin(params, USER_ID, "pw", bio, rng)
    vault = protocol.user_register_finish(
        state, params, protocol.tcs_register_user(tcs, params, req, rng)
    )
    session = protocol.user_login(vault, USER_ID, "pw", bio)
    pn = protocol.satellite_preneg_begin(sat, params, clock)
    resp, _ = protocol.tcs_preneg_respond(tcs, params, pn, clock, rng)
    protocol.satellite_preneg_finish(sat, params, resp, clock, rng)

    timings: dict[str, list[float]] = {"user": [], "satellite": [], "tcs": []}
    ops: dict[str, dict] = {}
    for trial in range(trials):
        clock.advance(50)
        before = instrument.snapshot()
        t0 = _time.perf_counter()
        access = protocol.user_access_request(session, TCS_ID, tcs.keys.pk, clock, rng)
        t1 = _time.perf_counter()
        response, forward = protocol.satellite_handle_access(sat, params, access, clock)
        t2 = _time.perf_counter()
        user_key = protocol.user_access_finish(session, response, clock)
        t3 = _time.perf_counter()
        tcs_key = protocol.tcs_access_finish(tcs, params, forward, clock, rng)
        t4 = _time.perf_counter()
        assert user_key == tcs_key or profile == "paper"
        timings["user"].append((t1 - t0) + (t3 - t2))
        timings["satellite"].append(t2 - t1)
        timings["tcs"].append(t4 - t3)
        if trial == 0:
            after = instrument.snapshot()
            ops["auth-phase-total"] = (after - before).as_dict()

    report = wire.size_report(params.ring)
    compute = {
        party: {
            "mean_ms": float(np.mean(vals) * 1000),
            "std_ms": float(np.std(vals) * 1000),
        }
        for party, vals in timings.items()
    }
    total_compute = sum(v["mean_ms"] for v in compute.values())
    return {
        "profile": profile,
        "virtual_link_ms": float(metrics["virtual_delay_ms"]),
        "critical_path_transmissions": metrics["critical_path_transmissions"],
        "keys_equal": metrics["keys_equal"],
        "compute_ms": compute,
        "total_compute_ms": total_compute,
        "total_delay_ms": total_compute + float(metrics["virtual_delay_ms"]),
        "op_counts": ops,
        "bits": {
            "user": report["auth_user_bits"],
            "satellite": report["auth_satellite_bits"],
            "total": report["auth_total_bits"],
        },
    }
