"""Command-line front end.

Exit status: 0 on success, 2 when decryption fails (Bob's observable
reaction), 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import param_design, reaction_attack, spectrum_recovery
from .crypto_scheme import (
    PRESETS,
    DecoderConfig,
    DecodingFailure,
    KeyFileError,
    PrivateKey,
    PublicKey,
    SchemeParams,
    decrypt,
    encrypt,
    encrypt_batch,
    estimate_dfr,
    format_private_key,
    format_public_key,
    keygen,
    parse_private_key,
    parse_public_key,
    preset_params,
)
from .monomial_code import (
    DistanceSpectrum,
    build_exponent_matrix,
    distance_spectrum,
    is_full_spectrum,
    random_monomial,
    row_equivalent,
    standard_form,
)

EXIT_OK, EXIT_ERROR, EXIT_DECODING_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# helpers


def _seeds(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _decoder(args) -> DecoderConfig | None:
    iters, thr = getattr(args, "max_iters", None), getattr(args, "threshold", None)
    if iters is None and thr is None:
        return None
    return DecoderConfig(max_iters=iters or DecoderConfig.max_iters, threshold=thr)


def _params(args) -> SchemeParams:
    dec = _decoder(args)
    kw = {} if dec is None else {"decoder": dec}
    if args.preset:
        par = preset_params(args.preset, **kw)
        if args.t is not None:
            par = SchemeParams.full(par.p, args.t, **kw)
        return par
    if args.p is None or args.t is None:
        raise UsageError("give --preset, or --p and --t (plus --r0/--n0 for a generic code)")
    if (args.r0 is None) != (args.n0 is None):
        raise UsageError("--r0 and --n0 go together")
    if args.r0 is None:
        return SchemeParams.full(args.p, args.t, **kw)
    return SchemeParams.generic(args.p, args.r0, args.n0, args.t, **kw)


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for this command")
    return args.seed


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _load_private(args) -> PrivateKey:
    return parse_private_key(_read(args.priv), _decoder(args))


def _load_public(args) -> PublicKey:
    return parse_public_key(_read(args.pub))


def _keys(args, rng: np.random.Generator) -> tuple[PrivateKey, PublicKey]:
    """Keys from --priv/--pub files, else freshly generated from the parameters."""
    if args.priv or args.pub:
        if not (args.priv and args.pub):
            raise UsageError("--priv and --pub go together")
        sk, pk = _load_private(args), _load_public(args)
        if (sk.params.p, sk.params.r0, sk.params.n0) != (pk.params.p, pk.params.r0, pk.params.n0):
            raise UsageError("private and public key describe different codes")
        return sk, pk
    return keygen(_params(args), rng)


def _bits_text(v: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in v) + "\n"


def _parse_bits(text: str, n: int, what: str) -> np.ndarray:
    s = "".join(text.split())
    if len(s) != n or set(s) - {"0", "1"}:
        raise UsageError(f"{what} must be {n} characters of 0/1")
    return np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")


def _fmt(x: float) -> str:
    return "undefined" if math.isnan(x) else f"{x:.4f}"


# ---------------------------------------------------------------------------
# commands


def cmd_keygen(args) -> int:
    (rng,) = _seeds(_need_seed(args), 1)
    sk, pk = keygen(_params(args), rng)
    prefix = args.out or "key"
    _write(prefix + ".priv", format_private_key(sk))
    _write(prefix + ".pub", format_public_key(pk))
    par = sk.params
    print(f"wrote {prefix}.priv {prefix}.pub  p={par.p} r0={par.r0} n0={par.n0} t={par.t}")
    return EXIT_OK


def cmd_encrypt(args) -> int:
    pk = _load_public(args)
    par = pk.params
    t = par.t if args.t is None else args.t
    (rng,) = _seeds(_need_seed(args), 1)
    u = _parse_bits(_read(args.input), par.k, "plaintext")
    e = np.zeros(par.n, dtype=np.uint8)
    e[rng.choice(par.n, size=t, replace=False)] = 1
    # a weight override bypasses encrypt's nominal-t check
    x = encrypt(pk, u, e) if t in (0, par.t) else encrypt_batch(pk, u[None], e[None])[0]
    _write(args.out, _bits_text(x))
    return EXIT_OK


def cmd_decrypt(args) -> int:
    sk = _load_private(args)
    x = _parse_bits(_read(args.input), sk.params.n, "ciphertext")
    res = decrypt(sk, x)
    if isinstance(res, DecodingFailure):
        print(f"decoding failure after {res.iterations} iterations "
              f"(syndrome weight {res.syndrome_weight})", file=sys.stderr)
        return EXIT_DECODING_FAILURE
    _write(args.out, _bits_text(res))
    return EXIT_OK


def cmd_dfr(args) -> int:
    key_rng, run_rng = _seeds(_need_seed(args), 2)
    sk, pk = _keys(args, key_rng)
    t = sk.params.t if args.t is None else args.t
    est = estimate_dfr((sk, pk), t, args.trials, int(run_rng.integers(2**62)))
    print(f"p={sk.params.p} r0={sk.params.r0} n0={sk.params.n0} t={t}")
    print(f"trials={est.trials} failures={est.failures} rate={est.rate:.6f} "
          f"ci95=[{est.ci_low:.6f}, {est.ci_high:.6f}] miscorrections={est.miscorrections}")
    return EXIT_OK


def _estimate(counters, r0: int, args) -> reaction_attack.SpectrumEstimate:
    if args.classifier == "size":
        return reaction_attack.classify_spectrum(counters, expected_size=r0,
                                                 lower_is_present=not args.higher_is_present)
    return reaction_attack.classify_spectrum(counters, lower_is_present=not args.higher_is_present)


def _estimate_report(est: reaction_attack.SpectrumEstimate) -> list[str]:
    lines = []
    for i, j in [(i, j) for i in range(est.n0) for j in range(i + 1, est.n0)]:
        pres = " ".join(map(str, sorted(est.present(i, j))))
        und = sorted(est.undecided(i, j))
        tail = f"  undecided: {' '.join(map(str, und))}" if und else ""
        lines.append(f"{i} {j}: {pres}{tail}")
    return lines


def cmd_attack(args) -> int:
    key_rng, run_rng = _seeds(_need_seed(args), 2)
    sk, pk = _keys(args, key_rng)
    if sk.Q is not None:
        raise UsageError("the attack targets keys with Q = I")
    progress = reaction_attack.stderr_progress if args.progress else None
    counters = reaction_attack.run_attack(reaction_attack.BobOracle(sk, args.t), pk, args.queries,
                                          int(run_rng.integers(2**62)), t=args.t, progress=progress)
    if args.out:
        _write(args.out, counters.to_csv())
    est = _estimate(counters, sk.params.r0, args)
    acc = reaction_attack.spectrum_accuracy(est, distance_spectrum(sk.W))
    lines = [f"p={sk.params.p} r0={sk.params.r0} n0={sk.params.n0} "
             f"t={pk.params.t if args.t is None else args.t}",
             f"queries={counters.queries} failures={counters.failures}"]
    lines += _estimate_report(est)
    lines.append(f"precision={_fmt(acc.precision)} recall={_fmt(acc.recall)}")
    lines.append(f"all_present={str(est.all_present()).lower()} "
                 f"all_undecided={str(est.all_undecided()).lower()}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_recover(args) -> int:
    truth = None
    if args.spectrum:
        S = DistanceSpectrum.from_text(_read(args.spectrum))
        if args.r0 is None:
            raise UsageError("--r0 is required with --spectrum")
        r0 = args.r0
    elif args.priv:
        sk = _load_private(args)
        truth = standard_form(sk.W)
        S, r0 = distance_spectrum(sk.W), sk.params.r0
    else:
        raise UsageError("give --spectrum FILE or --priv FILE")
    G, found, cands = spectrum_recovery.recover(S, r0, args.limit, args.candidates)
    lines = [f"p={S.p} n0={S.n0} r0={r0}",
             f"nodes={len(G.nodes)} edges={len(G.edges())}",
             f"cliques={len(found)} truncated={str(found.truncated).lower()}",
             f"candidates={len(cands)}"]
    if truth is not None:
        lines.append(f"true_key_among_candidates={str(any(row_equivalent(c, truth) for c in cands)).lower()}")
    if args.pub:
        pk = _load_public(args)
        if (pk.params.p, pk.params.n0) != (S.p, S.n0):
            raise UsageError("public key and spectrum describe different codes")
        (rng,) = _seeds(_need_seed(args), 1)
        t = pk.params.t if args.t is None else args.t
        probes = spectrum_recovery.make_probes(pk, t, args.probes, rng)
        dec = _decoder(args) or pk.params.decoder
        verdicts = [spectrum_recovery.validate_candidate(c, probes, dec) for c in cands]
        lines.append(f"probes={args.probes} t={t} accepted={sum(verdicts)}")
        for c, ok in zip(cands, verdicts):
            rows = "; ".join(" ".join(map(str, r)) for r in c.w.tolist())
            lines.append(f"{'accept' if ok else 'reject'}: {rows}")
    if args.out:
        _write(args.out, found.to_text())
    if args.graph:
        _write(args.graph, G.to_edgelist())
    print("\n".join(lines))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if args.priv:
        W = _load_private(args).W
    elif args.counters:
        if args.p is None or args.n0 is None or args.r0 is None:
            raise UsageError("--counters needs --p, --r0 and --n0")
        c = reaction_attack.AttackCounters.from_csv(_read(args.counters), args.p, args.n0)
        est = _estimate(c, args.r0, args)
        _write(args.out, est.to_spectrum().to_text())
        return EXIT_OK
    else:
        if args.p is None:
            raise UsageError("give --priv FILE, --counters FILE, or --p with --seed")
        (rng,) = _seeds(_need_seed(args), 1)
        if args.r0 is None:
            W, _ = build_exponent_matrix(args.p, rng)
        else:
            if args.n0 is None:
                raise UsageError("--r0 and --n0 go together")
            W = random_monomial(args.p, args.r0, args.n0, rng)
    S = distance_spectrum(W)
    _write(args.out, S.to_text())
    if args.out:
        print(f"full_spectrum={str(is_full_spectrum(S)).lower()}")
    return EXIT_OK


def cmd_design(args) -> int:
    if args.preset:
        rows = [PRESETS[args.preset]]
    elif args.p is not None:
        if args.t is None or args.sl is None:
            raise UsageError("a custom design row needs --sl, --p and --t")
        rows = [(args.sl, args.p, args.t)]
    else:
        rows = list(param_design.TABLE_ROWS)
    points = [param_design.design_point(SL, p, t) for SL, p, t in rows]
    text = param_design.table_csv(points) if args.csv else param_design.format_table(points)
    _write(args.out, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(sp, *, params=False, keys=False, seed=False, decoder=False):
    if params:
        sp.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--p", type=int)
        sp.add_argument("--t", type=int)
        sp.add_argument("--r0", type=int)
        sp.add_argument("--n0", type=int)
    if keys:
        sp.add_argument("--priv", help="private key file")
        sp.add_argument("--pub", help="public key file")
    if seed:
        sp.add_argument("--seed", type=int)
    if decoder:
        sp.add_argument("--max-iters", type=int, help="bit-flipping iterations (default 10)")
        sp.add_argument("--threshold", type=int,
                        help="fixed flipping threshold (default: strict majority)")
    sp.add_argument("--out", help="output path ('-' for stdout)")


def _classifier(sp):
    sp.add_argument("--classifier", choices=("size", "cluster"), default="size",
                    help="mark the r0 lowest ratios per pair, or split by two-means")
    sp.add_argument("--higher-is-present", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="monomial-mceliece", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("keygen", help="generate a key pair")
    _common(sp, params=True, seed=True, decoder=True)
    sp.set_defaults(func=cmd_keygen)

    sp = sub.add_parser("encrypt", help="encrypt a 0/1 plaintext file")
    _common(sp, keys=True, seed=True)
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--t", type=int, help="error weight (default: key's t)")
    sp.set_defaults(func=cmd_encrypt)

    sp = sub.add_parser("decrypt", help="decrypt; exit status 2 on decoding failure")
    _common(sp, keys=True, decoder=True)
    sp.add_argument("--in", dest="input", required=True)
    sp.set_defaults(func=cmd_decrypt)

    sp = sub.add_parser("dfr", help="Monte-Carlo decoding failure rate")
    _common(sp, params=True, keys=True, seed=True, decoder=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.set_defaults(func=cmd_dfr)

    sp = sub.add_parser("attack", help="reaction attack against an in-process oracle")
    _common(sp, params=True, keys=True, seed=True, decoder=True)
    sp.add_argument("--queries", type=int, default=10000)
    sp.add_argument("--progress", action="store_true", help="log queries,failures,elapsed to stderr")
    _classifier(sp)
    sp.set_defaults(func=cmd_attack)

    sp = sub.add_parser("recover", help="clique search and candidate validation from a spectrum")
    _common(sp, keys=True, seed=True, decoder=True)
    sp.add_argument("--spectrum", help="distance spectrum file")
    sp.add_argument("--r0", type=int)
    sp.add_argument("--t", type=int, help="probe error weight (default: key's t)")
    sp.add_argument("--limit", type=int, default=100000)
    sp.add_argument("--candidates", type=int, default=16)
    sp.add_argument("--probes", type=int, default=20)
    sp.add_argument("--graph", help="write the graph as an edge list")
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("spectrum", help="distance spectrum of a key, a fresh code, or attack counters")
    _common(sp, keys=True, seed=True)
    sp.add_argument("--p", type=int)
    sp.add_argument("--r0", type=int)
    sp.add_argument("--n0", type=int)
    sp.add_argument("--counters", help="counters CSV from 'attack --out'")
    _classifier(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("design", help="work factors and key sizes of the designed instances")
    _common(sp)
    sp.add_argument("--preset", choices=sorted(PRESETS))
    sp.add_argument("--sl", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--csv", action="store_true")
    sp.set_defaults(func=cmd_design)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, KeyFileError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
