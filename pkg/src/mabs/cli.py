"""``mabs`` command line.

Every command is a separate process: global parameters, keys, the DCC
state directory and ciphertexts are all files. Exit status is 0 on success,
1 for usage and operational errors, and 2 when designcryption fails, with
``UNSATISFIED`` or ``AUTH_FAIL`` on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .bench import SUITES, run_suite
from .config import Settings
from .errors import ConfigurationError, DesigncryptionError, EncodingError, MabsError
from .logging import setup_json_logging
from .models import GlobalParamsDocument, KeyKind
from .pairing import BilinearProvider, get_provider
from .randomness import Rng, make_rng
from .revocation import DataCommunicationCompany
from .scenario import events_to_jsonl, run_scenario
from .scheme import (
    GlobalParams,
    authority_setup,
    dec_key_gen,
    designcrypt,
    global_setup,
    sign_key_gen,
    signcrypt,
    ver_key_gen,
)
from .simulator import GridSimulator
from .wire import (
    Keyring,
    decode_authority_public,
    decode_authority_secret,
    decode_ciphertext,
    decode_keyring,
    decode_signer_key,
    dump_key_file,
    encode_authority_public,
    encode_authority_secret,
    encode_ciphertext,
    encode_keyring,
    encode_signer_key,
    load_key_file,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_DESIGNCRYPT = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; 2 is reserved for designcryption failures."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


class _Context:
    def __init__(self, args: argparse.Namespace, settings: Settings):
        self.args = args
        self.settings = settings
        seed = settings.seed if settings.seed is not None else args.seed
        self.rng: Rng = make_rng(seed)

    def provider(self) -> BilinearProvider:
        return get_provider(
            self.args.provider or self.settings.provider,
            seed=self.settings.mock_seed,
            order=self.settings.mock_order,
        )

    def gp(self) -> GlobalParams:
        text = _read_text(self.args.gp)
        try:
            doc = GlobalParamsDocument.model_validate_json(text)
        except ValidationError as exc:
            raise EncodingError(f"{self.args.gp} is not a global parameters file: {exc}")
        return GlobalParams.from_document(doc)

    def dcc(self, gp: GlobalParams) -> DataCommunicationCompany:
        return DataCommunicationCompany.load(
            self.args.state, gp.provider, self.settings.prime_extra_bits
        )


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: Optional[str], data) -> None:
    if path is None or path == "-":
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        return
    target = Path(path)
    if isinstance(data, bytes):
        target.write_bytes(data)
    else:
        target.write_text(data, encoding="utf-8")


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _split_assignment(value: str) -> tuple:
    name, sep, rest = value.partition("=")
    if not sep or not name:
        raise UsageError(f"expected NAME=VALUE, got {value!r}")
    return name, rest


def _qualify(owner: str, attribute: str) -> str:
    return attribute if "." in attribute else f"{owner}.{attribute}"


def _load_keyring(gp: GlobalParams, path: str, gid: str) -> Keyring:
    target = Path(path)
    if not target.exists():
        return Keyring(gid)
    ring = decode_keyring(gp.provider, load_key_file(_read_text(path), KeyKind.KEYRING))
    if ring.gid != gid:
        raise ConfigurationError(f"{path} is the keyring of {ring.gid!r}, not {gid!r}")
    return ring


def _save_keyring(gp: GlobalParams, path: str, ring: Keyring) -> None:
    _write(path, dump_key_file(KeyKind.KEYRING, encode_keyring(gp.provider, ring)))


# -- commands --------------------------------------------------------------------


def cmd_setup(ctx: _Context) -> int:
    args = ctx.args
    controllers: Dict[str, str] = {}
    attributes: List[str] = []
    authorities: List[str] = []
    for value in args.authority or []:
        name, attrs = _split_assignment(value)
        authorities.append(name)
        for attr in filter(None, attrs.split(",")):
            attr = _qualify(name, attr)
            attributes.append(attr)
            controllers[attr] = name
    identity_attributes: List[str] = []
    signers: List[str] = []
    for value in args.signer or []:
        name, _, identity = value.partition("=")
        identity = _qualify(name, identity or ctx.settings.identity_attribute_name)
        signers.append(name)
        identity_attributes.append(identity)
        controllers[identity] = name
    gp = global_setup(
        ctx.provider(),
        attributes=attributes,
        identity_attributes=identity_attributes,
        authorities=authorities,
        signers=signers,
        controller_map=controllers,
        security_parameter=args.security_parameter,
        identities=args.identity or (),
    )
    _write(args.out, gp.to_document().canonical_json())
    return EXIT_OK


def cmd_authority_keygen(ctx: _Context) -> int:
    gp = ctx.gp()
    keypair = authority_setup(gp, ctx.args.authority, ctx.rng)
    _write(
        ctx.args.public,
        dump_key_file(
            KeyKind.AUTHORITY_PUBLIC, encode_authority_public(gp.provider, keypair.public)
        ),
    )
    _write(
        ctx.args.out,
        dump_key_file(KeyKind.AUTHORITY_SECRET, encode_authority_secret(keypair.secret)),
    )
    return EXIT_OK


def cmd_signer_keygen(ctx: _Context) -> int:
    gp = ctx.gp()
    key = sign_key_gen(gp, ctx.args.signer, ctx.rng)
    _write(ctx.args.out, dump_key_file(KeyKind.SIGNER_KEY, encode_signer_key(key)))
    return EXIT_OK


def cmd_deckey(ctx: _Context) -> int:
    gp = ctx.gp()
    secret = decode_authority_secret(
        gp.provider, load_key_file(_read_text(ctx.args.keys), KeyKind.AUTHORITY_SECRET)
    )
    ring = _load_keyring(gp, ctx.args.out, ctx.args.gid)
    attribute = _qualify(secret.controller, ctx.args.attribute)
    ring.add(dec_key_gen(gp, ctx.args.gid, attribute, secret, ctx.rng))
    _save_keyring(gp, ctx.args.out, ring)
    return EXIT_OK


def cmd_verkey(ctx: _Context) -> int:
    gp = ctx.gp()
    signer_key = decode_signer_key(
        gp.provider, load_key_file(_read_text(ctx.args.keys), KeyKind.SIGNER_KEY)
    )
    ring = _load_keyring(gp, ctx.args.out, ctx.args.gid)
    ring.add(ver_key_gen(gp, ctx.args.gid, signer_key.signer, signer_key, ctx.rng))
    _save_keyring(gp, ctx.args.out, ring)
    return EXIT_OK


def cmd_register(ctx: _Context) -> int:
    gp = ctx.gp()
    gid = gp.check_identity(ctx.args.gid)
    dcc = ctx.dcc(gp)
    ring = _load_keyring(gp, ctx.args.out, gid)
    ring.prime = dcc.register(gid, ctx.rng)
    dcc.save(ctx.args.state)
    _save_keyring(gp, ctx.args.out, ring)
    return EXIT_OK


def cmd_grant(ctx: _Context) -> int:
    gp = ctx.gp()
    attribute = ctx.args.attribute
    gp.controller(attribute)
    dcc = ctx.dcc(gp)
    if ctx.args.remove:
        if not dcc.revoke_member(attribute, ctx.args.gid):
            raise ConfigurationError(f"{ctx.args.gid!r} is not a member of {attribute!r}")
    else:
        dcc.grant(attribute, ctx.args.gid)
    dcc.save(ctx.args.state)
    return EXIT_OK


def cmd_signcrypt(ctx: _Context) -> int:
    gp = ctx.gp()
    signer_key = decode_signer_key(
        gp.provider, load_key_file(_read_text(ctx.args.keys), KeyKind.SIGNER_KEY)
    )
    publics = {}
    for path in ctx.args.public or []:
        key = decode_authority_public(
            gp.provider, load_key_file(_read_text(path), KeyKind.AUTHORITY_PUBLIC)
        )
        publics[key.controller] = key
    text = signcrypt(
        gp,
        _read_input(ctx.args.input),
        ctx.args.policy,
        signer_key,
        publics,
        ctx.rng,
        aead=ctx.args.aead,
    )
    _write(ctx.args.out, encode_ciphertext(gp.provider, text))
    return EXIT_OK


def cmd_revoke(ctx: _Context) -> int:
    gp = ctx.gp()
    dcc = ctx.dcc(gp)
    text = decode_ciphertext(gp, _read_input(ctx.args.input))
    _write(ctx.args.out, encode_ciphertext(gp.provider, dcc.revoke(text, ctx.rng)))
    return EXIT_OK


def cmd_designcrypt(ctx: _Context) -> int:
    gp = ctx.gp()
    ring = decode_keyring(gp.provider, load_key_file(_read_text(ctx.args.keys), KeyKind.KEYRING))
    text = decode_ciphertext(gp, _read_input(ctx.args.input))
    message = designcrypt(
        gp,
        text,
        ring.verification_key_for(text.signer),
        ring.decryption_keys.values(),
        ring.prime,
    )
    _write(ctx.args.out, message)
    return EXIT_OK


def cmd_sim_run(ctx: _Context) -> int:
    seed = ctx.settings.seed if ctx.settings.seed is not None else ctx.args.seed
    sim = GridSimulator(ctx.provider(), seed=seed, settings=ctx.settings)
    events = run_scenario(sim, ctx.args.script)
    _write(ctx.args.out, events_to_jsonl(events))
    return EXIT_OK


BENCH_PARAM_FLAGS = {"signcrypt": "sizes", "designcrypt": "attributes", "revoke": "users"}


def cmd_bench(ctx: _Context) -> int:
    args = ctx.args
    flag = BENCH_PARAM_FLAGS[args.suite]
    for other in BENCH_PARAM_FLAGS.values():
        if other != flag and getattr(args, other) is not None:
            raise UsageError(f"bench {args.suite} takes --{flag}, not --{other}")
    params = getattr(args, flag)
    report = run_suite(
        args.suite,
        ctx.provider(),
        params,
        iterations=args.iterations or ctx.settings.bench_iterations,
        min_iterations=ctx.settings.bench_min_iterations,
        seed=args.seed if ctx.settings.seed is None else ctx.settings.seed,
        allow_mock=args.allow_mock,
    )
    _write(args.out, report.to_csv())
    return EXIT_OK


def cmd_serve(ctx: _Context) -> int:
    import uvicorn

    from .webapp import create_app

    gp = ctx.gp()
    app = create_app(gp, ctx.dcc(gp), ctx.settings, ctx.args.state)
    uvicorn.run(
        app,
        host=ctx.args.host or ctx.settings.relay_host,
        port=ctx.args.port or ctx.settings.relay_port,
        log_config=None,
    )
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mabs", description="Attribute-based signcryption for grid multicast")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--provider", choices=["production", "mock"], default=None)
    parser.add_argument("--seed", type=int, default=None, help="Overridden by MABS_SEED")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help_text: str, gp: bool = True, state: bool = False):
        p = sub.add_parser(name, help=help_text)
        if gp:
            p.add_argument("--gp", required=True, help="Global parameters file")
        if state:
            p.add_argument("--state", required=True, help="DCC state directory")
        p.set_defaults(handler=handler)
        return p

    p = command("setup", cmd_setup, "Create global parameters", gp=False)
    p.add_argument("--authority", action="append", metavar="NAME=ATTR,...")
    p.add_argument("--signer", action="append", metavar="NAME[=IDENTITY]")
    p.add_argument("--identity", action="append", metavar="GID")
    p.add_argument("--security-parameter", type=int, default=None)
    p.add_argument("--out", required=True)

    p = command("authority-keygen", cmd_authority_keygen, "Create an authority key pair")
    p.add_argument("--authority", required=True)
    p.add_argument("--public", required=True, help="Public key output")
    p.add_argument("--out", required=True, help="Secret key output")

    p = command("signer-keygen", cmd_signer_keygen, "Create a signing key")
    p.add_argument("--signer", required=True)
    p.add_argument("--out", required=True)

    p = command("deckey", cmd_deckey, "Issue a decryption key into a keyring")
    p.add_argument("--keys", required=True, help="Authority secret key")
    p.add_argument("--gid", required=True)
    p.add_argument("--attribute", required=True)
    p.add_argument("--out", required=True, help="Keyring, created or extended")

    p = command("verkey", cmd_verkey, "Issue a verification key into a keyring")
    p.add_argument("--keys", required=True, help="Signer key")
    p.add_argument("--gid", required=True)
    p.add_argument("--out", required=True, help="Keyring, created or extended")

    p = command("register", cmd_register, "Assign a user prime", state=True)
    p.add_argument("--gid", required=True)
    p.add_argument("--out", required=True, help="Keyring, created or extended")

    p = command("grant", cmd_grant, "Add a gid to an access list", state=True)
    p.add_argument("--gid", required=True)
    p.add_argument("--attribute", required=True)
    p.add_argument("--remove", action="store_true", help="Remove the gid instead")

    p = command("signcrypt", cmd_signcrypt, "Signcrypt a payload")
    p.add_argument("--policy", required=True)
    p.add_argument("--keys", required=True, help="Signer key")
    p.add_argument("--public", action="append", help="Authority public key, repeatable")
    p.add_argument("--aead", choices=["aes-256-gcm", "chacha20-poly1305"], default=None)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)

    p = command("revoke", cmd_revoke, "Apply the access lists to a ciphertext", state=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)

    p = command("designcrypt", cmd_designcrypt, "Verify and decrypt a ciphertext")
    p.add_argument("--keys", required=True, help="User keyring")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)

    sim = sub.add_parser("sim", help="Grid simulator")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    p = sim_sub.add_parser("run", help="Replay a scenario script")
    p.add_argument("script")
    p.add_argument("--out", default=None, help="JSONL event log (stdout by default)")
    p.set_defaults(handler=cmd_sim_run)

    p = command("bench", cmd_bench, "Time one suite and print CSV", gp=False)
    p.add_argument("suite", choices=sorted(SUITES))
    group = p.add_mutually_exclusive_group()
    group.add_argument("--users", type=int, nargs="+")
    group.add_argument("--sizes", type=int, nargs="+")
    group.add_argument("--attributes", type=int, nargs="+")
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--allow-mock", action="store_true", help="Time the mock provider anyway")
    p.add_argument("--out", default=None)

    p = command("serve", cmd_serve, "Run the DCC relay", state=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    settings = Settings()
    setup_json_logging(getattr(logging, settings.log_level), settings.log_format)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.handler(_Context(args, settings))
    except DesigncryptionError as exc:
        logger.info(f"Designcryption failed: {exc}")
        print(exc.outcome, file=sys.stderr)
        return EXIT_DESIGNCRYPT
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_ERROR
    except (MabsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
