"""Command-line front-end for ceremonies, federation cycles, and the simulator.

Commands are machine-first: primary results go to stdout as canonical JSON or
CSV, human-readable summaries go to stderr. Every command draws all of its
randomness from --seed, so identical invocations produce identical bytes.
When an output directory is given, a run manifest (command line, input
digests, seed, tool version) is written alongside the outputs; replaying the
manifest reproduces them exactly.

Exit codes: 0 success or verification passed, 1 verification failed,
2 malformed input or usage error. Never anything else.

Fixture schemas (canonical JSON):

  ceremony  {"event": {...EventConfig fields...}, "attendees": int | [ids],
             "witnesses": int, "attacks": [{"kind": "inflate", "k": int} |
             {"kind": "double_scan", "attendee_id": id} |
             {"kind": "late_entry", "attendee_id": id}],
             "policy": {...VerifyPolicy fields...}}

  federation  {"schedule": {"cycle": int, "sites": [ids], "deadline": int},
               "bodies": {site: int}, "volunteers": {site: int},
               "behaviors": {site: {...SiteBehavior fields...}},
               "witnesses_per_site": int, "cross_witnesses_per_site": int,
               "tolerance": int}

  sybilsim   the SybilScenario fields.

  apps tag       {"ring_size": int, "service_id": id, "action_id": id,
                  "uses": [signer indices]}
  apps count     {"persons": int, "accounts_per_person": int, "post_id": id}
  apps sortition {"roll_size": int, "k": int}
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .canonical import canonical_dumps
from .ceremony import (
    DoubleScan,
    EventConfig,
    EventGround,
    Inflate,
    LateEntry,
    RollList,
    VerifyPolicy,
    add_cosignature,
    admit,
    finalize,
    inject_attack,
    open_event,
    publish,
    roll_digest,
    scan_exit,
    seal,
    verify_event,
)
from .crypto import cosign, keygen
from .federation import (
    Body,
    FederationSchedule,
    SiteBehavior,
    SiteRecord,
    WitnessAssignment,
    assign_cross_witnesses,
    build_schedule,
    simulate_cycle,
    verify_cycle,
)
from .rng import HashDRBG, seed_from_int
from .sybilsim import DEFAULT_MASTER_SEED, SybilScenario, run_scenario


class UsageError(Exception):
    pass


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _load_json(path: str):
    try:
        with open(path, "rb") as handle:
            return json.loads(handle.read().decode("utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def _file_digest(path: str) -> str:
    with open(path, "rb") as handle:
        return hashlib.blake2b(handle.read(), digest_size=32).hexdigest()


def _write_output(out_dir: Path | None, name: str, data: bytes, written: dict) -> None:
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_bytes(data)
    written[name] = hashlib.blake2b(data, digest_size=32).hexdigest()


def _write_manifest(args, argv: list[str], inputs: list[str], written: dict) -> None:
    out_dir = getattr(args, "out", None)
    if out_dir is None:
        return
    manifest = {
        "command": list(argv),
        "inputs": {path: _file_digest(path) for path in inputs},
        "master_seed": args.seed,
        "out_dir": str(out_dir),
        "outputs": dict(sorted(written.items())),
        "tool_version": __version__,
    }
    Path(out_dir).mkdir(parents=True, exist_ok=True)
    (Path(out_dir) / "manifest.json").write_bytes(canonical_dumps(manifest))


def replay(manifest_path: str) -> int:
    """Re-run the command recorded in a manifest (used to audit reproducibility)."""
    manifest = _load_json(manifest_path)
    return main(manifest["command"])


# ---------------------------------------------------------------- ceremony

_ATTACK_KINDS = {"inflate", "double_scan", "late_entry"}


def _parse_attack(obj: dict):
    kind = obj.get("kind")
    if kind == "inflate":
        return Inflate(k=int(obj["k"]))
    if kind == "double_scan":
        return DoubleScan(attendee_id=obj["attendee_id"])
    if kind == "late_entry":
        return LateEntry(attendee_id=obj["attendee_id"])
    raise UsageError(f"unknown attack kind {kind!r}, expected one of {sorted(_ATTACK_KINDS)}")


def _run_ceremony_fixture(fixture: dict, seed: int):
    if not isinstance(fixture, dict):
        raise UsageError("ceremony fixture must be a JSON object")
    config = EventConfig(**dict(fixture.get("event") or {}))
    attendees = fixture.get("attendees", 12)
    if isinstance(attendees, int):
        attendees = [f"att-{i:04d}" for i in range(attendees)]
    witnesses = int(fixture.get("witnesses", 5))
    attacks = [_parse_attack(obj) for obj in fixture.get("attacks", [])]

    drbg = HashDRBG(seed_from_int(seed), domain=b"popkit/cli-ceremony")
    state = open_event(config)
    for attendee in attendees:
        state = admit(state, attendee, now=config.opened_at)
    state = seal(state, now=config.deadline)
    for attendee in attendees:
        pair = keygen(drbg.take(32))
        state = scan_exit(state, attendee, pair.public)
    for attack in attacks:
        state = inject_attack(state, attack)

    roll = publish(state)
    for _ in range(witnesses):
        witness = keygen(drbg.take(32))
        cosig = cosign(witness.secret, roll.list_digest)
        roll = add_cosignature(roll, cosig, attested_count=state.ground.scan_count)
    finalize(state)
    return roll, state.ground


def _ceremony_policy(fixture: dict | None) -> VerifyPolicy:
    if fixture and fixture.get("policy"):
        return VerifyPolicy(**fixture["policy"])
    return VerifyPolicy()


def cmd_ceremony(args, argv: list[str]) -> int:
    written: dict = {}
    if args.action == "run":
        fixture = _load_json(args.fixture)
        roll, ground = _run_ceremony_fixture(fixture, args.seed)
        roll_bytes = roll.serialize()
        ground_bytes = canonical_dumps(ground.to_obj())
        _write_output(args.out, "roll.json", roll_bytes, written)
        _write_output(args.out, "ground.json", ground_bytes, written)
        _write_manifest(args, argv, [args.fixture], written)
        sys.stdout.write(roll_bytes.decode("utf-8") + "\n")
        _note(
            f"event {roll.event_id}: {len(roll.tokens)} tokens, "
            f"{len(roll.cosignatures)} cosignatures, scan count {ground.scan_count}"
        )
        return 0

    if args.roll and args.ground:
        roll = RollList.from_obj(_load_json(args.roll))
        ground = EventGround.from_obj(_load_json(args.ground))
        policy = _ceremony_policy(_load_json(args.policy) if args.policy else None)
        inputs = [args.roll, args.ground] + ([args.policy] if args.policy else [])
    elif args.fixture:
        fixture = _load_json(args.fixture)
        roll, ground = _run_ceremony_fixture(fixture, args.seed)
        policy = _ceremony_policy(fixture)
        inputs = [args.fixture]
    else:
        raise UsageError("ceremony verify needs a fixture or --roll plus --ground")

    report = verify_event(roll, ground, policy)
    report_bytes = canonical_dumps(report.to_obj())
    _write_output(args.out, "report.json", report_bytes, written)
    _write_manifest(args, argv, inputs, written)
    sys.stdout.write(report_bytes.decode("utf-8") + "\n")
    verdict = "passed" if report.passed else "FAILED"
    codes = sorted({finding.code for finding in report.findings})
    _note(f"event {roll.event_id}: verification {verdict}" + (f" {codes}" if codes else ""))
    return 0 if report.passed else 1


# -------------------------------------------------------------- federation


def _run_federation_fixture(fixture: dict, seed: int):
    if not isinstance(fixture, dict) or "schedule" not in fixture:
        raise UsageError("federation fixture must be an object with a schedule")
    sched = fixture["schedule"]
    schedule = build_schedule(
        cycle=int(sched["cycle"]), sites=list(sched["sites"]), deadline=int(sched["deadline"])
    )
    bodies_per_site = fixture.get("bodies", {site: 20 for site in schedule.sites})
    world = [
        Body(body_id=f"{site}-b{i:03d}", home_site=site)
        for site in schedule.sites
        for i in range(int(bodies_per_site.get(site, 20)))
    ]
    volunteers_per_site = fixture.get("volunteers", {site: 3 for site in schedule.sites})
    volunteers = [
        (f"{site}-b{i:03d}", site)
        for site in schedule.sites
        for i in range(int(volunteers_per_site.get(site, 3)))
    ]
    behaviors = {
        site: SiteBehavior(**obj) for site, obj in (fixture.get("behaviors") or {}).items()
    }

    drbg = HashDRBG(seed_from_int(seed), domain=b"popkit/cli-federation")
    assignments = assign_cross_witnesses(
        drbg.take(32),
        volunteers,
        schedule.sites,
        per_site=int(fixture.get("cross_witnesses_per_site", 2)),
    )
    records = simulate_cycle(
        world,
        schedule,
        site_behaviors=behaviors,
        assignments=assignments,
        seed=drbg.take(32),
        witnesses_per_site=int(fixture.get("witnesses_per_site", 3)),
    )
    report = verify_cycle(
        records, schedule, assignments, tolerance=int(fixture.get("tolerance", 0))
    )
    return schedule, records, assignments, report


def _report_exit(report, report_bytes: bytes) -> int:
    sys.stdout.write(report_bytes.decode("utf-8") + "\n")
    if report.passed:
        _note(f"cycle verified: {len(report.passed_sites)} sites clean")
        return 0
    for flag in report.flagged_sites:
        _note(f"site {flag.site_id} flagged: {', '.join(flag.reasons)}")
    return 1


def cmd_federation(args, argv: list[str]) -> int:
    written: dict = {}
    if args.action == "simulate":
        fixture = _load_json(args.fixture)
        schedule, records, assignments, report = _run_federation_fixture(fixture, args.seed)
        record_bytes = canonical_dumps([record.to_obj() for record in records])
        reveal_bytes = canonical_dumps([assignment.to_obj() for assignment in assignments])
        schedule_bytes = canonical_dumps(schedule.to_obj())
        report_bytes = canonical_dumps(report.to_obj())
        _write_output(args.out, "records.json", record_bytes, written)
        _write_output(args.out, "reveals.json", reveal_bytes, written)
        _write_output(args.out, "schedule.json", schedule_bytes, written)
        _write_output(args.out, "report.json", report_bytes, written)
        _write_manifest(args, argv, [args.fixture], written)
        return _report_exit(report, report_bytes)

    if not (args.records and args.schedule and args.reveals):
        raise UsageError("federation verify needs --records, --schedule and --reveals")
    records = [SiteRecord.from_obj(obj) for obj in _load_json(args.records)]
    schedule = FederationSchedule.from_obj(_load_json(args.schedule))
    reveals = [WitnessAssignment.from_obj(obj) for obj in _load_json(args.reveals)]
    report = verify_cycle(records, schedule, reveals, tolerance=args.tolerance)
    report_bytes = canonical_dumps(report.to_obj())
    _write_output(args.out, "report.json", report_bytes, written)
    _write_manifest(args, argv, [args.records, args.schedule, args.reveals], written)
    return _report_exit(report, report_bytes)


# ---------------------------------------------------------------- sybilsim


def _parse_sweep(text: str) -> tuple[str, list]:
    key, sep, tail = text.partition("=")
    if not sep or not key or not tail:
        raise UsageError("--sweep expects key=value1,value2,...")
    values = []
    for raw in tail.split(","):
        try:
            values.append(json.loads(raw))
        except json.JSONDecodeError:
            values.append(raw)
    return key, values


def _csv_target(args, run_name: str, single: bool) -> Path | None:
    if args.csv is not None:
        base = Path(args.csv)
        if single:
            return base
        return base.with_name(f"{base.stem}-{run_name}{base.suffix or '.csv'}")
    if args.out is not None:
        return Path(args.out) / f"{run_name}.csv"
    return None


def cmd_sybilsim(args, argv: list[str]) -> int:
    obj = _load_json(args.scenario)
    if not isinstance(obj, dict):
        raise UsageError("scenario file must hold a JSON object")
    if args.replications is not None:
        obj = {**obj, "replications": args.replications}

    if args.sweep:
        key, values = _parse_sweep(args.sweep)
        runs = [(f"{key}-{value}", {**obj, key: value}) for value in values]
    else:
        runs = [("result", obj)]

    written: dict = {}
    summaries = []
    for run_name, run_obj in runs:
        scenario = SybilScenario.from_obj(run_obj)
        result = run_scenario(scenario, master_seed=args.seed)
        csv_bytes = result.to_csv().encode("utf-8")
        target = _csv_target(args, run_name, single=len(runs) == 1)
        if target is not None:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(csv_bytes)
            written[target.name] = hashlib.blake2b(csv_bytes, digest_size=32).hexdigest()
        summary = {"run": run_name, **result.summary()}
        summaries.append(summary)
        _note(
            f"{run_name}: advantage {float(summary['mean_advantage']):.3f}, "
            f"minions {float(summary['mean_minions']):.1f}/cycle, "
            f"final share {float(summary['final_share']):.3f}"
        )
    _write_manifest(args, argv, [args.scenario], written)
    sys.stdout.write(canonical_dumps({"runs": summaries}).decode("utf-8") + "\n")
    return 0


# -------------------------------------------------------------------- apps


def _synthetic_roll(event_id: str, cycle: int, tokens) -> RollList:
    tokens = tuple(tokens)
    return RollList(
        event_id=event_id,
        cycle=cycle,
        tokens=tokens,
        list_digest=roll_digest(event_id, cycle, tokens),
        cosignatures=(),
        attested_counts=(),
    )


def _fixture_keys(drbg: HashDRBG, count: int):
    return [keygen(drbg.take(32)) for _ in range(count)]


def cmd_apps(args, argv: list[str]) -> int:
    from .applications import (
        count_unique_upvotes,
        make_service_tag,
        make_upvote,
        service_check,
        sortition_select,
    )

    fixture = _load_json(args.fixture)
    if not isinstance(fixture, dict):
        raise UsageError("apps fixture must be a JSON object")
    drbg = HashDRBG(seed_from_int(args.seed), domain=b"popkit/cli-apps")
    written: dict = {}

    if args.action == "tag":
        keys = _fixture_keys(drbg, int(fixture.get("ring_size", 4)))
        roll = _synthetic_roll("cli-ring", 1, (pair.public for pair in keys))
        service_id = fixture.get("service_id", "service")
        action_id = fixture.get("action_id", "action")
        seen: set = set()
        results = []
        for signer in fixture.get("uses", [0]):
            proof = make_service_tag(keys[int(signer)].secret, roll, service_id, action_id)
            results.append(service_check(proof, roll, service_id, action_id, seen).value)
        out_bytes = canonical_dumps({"results": results})
        _write_output(args.out, "tags.json", out_bytes, written)
        _write_manifest(args, argv, [args.fixture], written)
        sys.stdout.write("\n".join(results) + "\n")
        _note(f"{len(results)} uses checked against service {service_id!r}")
        return 0

    if args.action == "count":
        persons = int(fixture.get("persons", 1))
        accounts = int(fixture.get("accounts_per_person", 1))
        post_id = fixture.get("post_id", "post-0")
        keys = _fixture_keys(drbg, persons)
        roll = _synthetic_roll("cli-audience", 1, (pair.public for pair in keys))
        upvotes = [
            make_upvote(pair.secret, roll, post_id, f"person{i}-acct{j}")
            for i, pair in enumerate(keys)
            for j in range(accounts)
        ]
        counted = count_unique_upvotes(post_id, upvotes, roll)
        out_bytes = canonical_dumps(
            {"accounts": persons * accounts, "counted": counted, "post_id": post_id}
        )
        _write_output(args.out, "count.json", out_bytes, written)
        _write_manifest(args, argv, [args.fixture], written)
        sys.stdout.write(f"{counted}\n")
        _note(f"{persons * accounts} accounts collapse to {counted} persons on {post_id!r}")
        return 0

    roll_size = int(fixture.get("roll_size", 20))
    k = int(fixture.get("k", 5))
    keys = _fixture_keys(drbg, roll_size)
    roll = _synthetic_roll("cli-sortition", 1, (pair.public for pair in keys))
    result = sortition_select(roll, seed_from_int(args.seed), k)
    out_bytes = canonical_dumps(result.to_obj())
    _write_output(args.out, "sortition.json", out_bytes, written)
    _write_manifest(args, argv, [args.fixture], written)
    sys.stdout.write(out_bytes.decode("utf-8") + "\n")
    _note(f"selected {k} of {roll_size} tokens")
    return 0


# ------------------------------------------------------------------ parser


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_MASTER_SEED, help="master seed (u64)")
    parser.add_argument("--out", type=Path, default=None, help="output directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="popkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"popkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ceremony = sub.add_parser("ceremony", help="run or verify one pseudonym-party event")
    ceremony.add_argument("action", choices=("run", "verify"))
    ceremony.add_argument("fixture", nargs="?", help="event fixture JSON")
    ceremony.add_argument("--roll", help="published roll list JSON (verify)")
    ceremony.add_argument("--ground", help="ground-truth record JSON (verify)")
    ceremony.add_argument("--policy", help="verification policy JSON (verify)")
    _add_common(ceremony)
    ceremony.set_defaults(handler=cmd_ceremony)

    federation = sub.add_parser("federation", help="simulate or verify a federated cycle")
    federation.add_argument("action", choices=("simulate", "verify"))
    federation.add_argument("fixture", nargs="?", help="cycle fixture JSON (simulate)")
    federation.add_argument("--records", help="site records JSON (verify)")
    federation.add_argument("--schedule", help="schedule JSON (verify)")
    federation.add_argument("--reveals", help="witness reveals JSON (verify)")
    federation.add_argument("--tolerance", type=int, default=0)
    _add_common(federation)
    federation.set_defaults(handler=cmd_federation)

    sybilsim = sub.add_parser("sybilsim", help="run the Sybil-economics simulator")
    sybilsim.add_argument("scenario", help="scenario JSON")
    sybilsim.add_argument("--csv", help="CSV output path")
    sybilsim.add_argument("--sweep", help="key=value1,value2,... scenario sweep")
    sybilsim.add_argument("--replications", type=int, default=None)
    _add_common(sybilsim)
    sybilsim.set_defaults(handler=cmd_sybilsim)

    apps = sub.add_parser("apps", help="token applications: tags, counts, sortition")
    apps.add_argument("action", choices=("tag", "count", "sortition"))
    apps.add_argument("fixture", help="fixture JSON")
    _add_common(apps)
    apps.set_defaults(handler=cmd_apps)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.handler(args, argv)
    except UsageError as exc:
        _note(f"error: {exc}")
        return 2
    except Exception as exc:  # malformed fixtures land here; contract pins exit 2
        _note(f"error: {type(exc).__name__}: {exc}")
        return 2


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
