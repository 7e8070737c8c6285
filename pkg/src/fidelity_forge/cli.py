"""Command-line front end: ``fidelity-forge {exact,sweep,benchmark,optimize}``.

Every command resolves its settings from built-in defaults, an optional INI
file (``--config``, one section per command plus an optional ``[run]``
section for shared keys), then explicit flags. The resolved settings are
echoed as ``#`` comment lines ahead of the CSV body.

Channel sources:
    table<N> | toronto        fixture unitary (generator tables or circuit tables)
    seed:<k>                  exp(-iH) for a random generator drawn from seed k
    perturb:<src>:eps=<x>     the target conjugated by exp(-i x H_src)
    circuit:<file>            unitary of a gate-list file (``u3 q theta phi lambda``,
                              ``cnot c t``, optional ``qubits n``)

Exit codes: 0 success, 2 configuration error, 3 benchmark sanity band violated.
"""
from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import channels as ch
from .errors import ConfigError, FidelityForgeError
from .estimation import Mode, benchmark_estimators, default_schedule, parse_schedule, resolve_threads, stream
from .estimation import BENCHMARK_HEADER
from .fidelity import k_fidelities, process_fidelity_exact, zero_fidelity
from .optimize import PRESETS, OptimizationConfig, run_optimization

EXIT_OK, EXIT_CONFIG, EXIT_BAND = 0, 2, 3


# ----------------------------------------------------------- option tables


def _mode(text: str) -> str:
    Mode(text)
    return text


def _noise(text: str) -> str:
    _parse_noise(text)
    return text


COMMON = {"seed": (int, 0), "threads": (int, 0)}
OPTIONS = {
    "exact": {"qubits": (int, 3), "target": (str, "table4"), "compare": (str, "perturb:table5:eps=0.1")},
    "sweep": {
        "qubits": (int, 3),
        "samples": (int, 100),
        "eps_min": (float, 0.0),
        "eps_max": (float, 1.0),
        "fixed_target": (int, 0),
    },
    "benchmark": {
        "reps": (int, 500),
        "schedule": (str, ""),
        "target": (str, "table4"),
        "compare": (str, "perturb:table5:eps=0.1"),
        "qubits": (int, 3),
    },
    "optimize": {
        "preset": (str, "paper"),
        "iterations": (int, None),
        "l": (int, None),
        "m": (int, None),
        "mode": (_mode, None),
        "initial_probes": (int, None),
        "noise": (_noise, "default"),
    },
}


def _parse_noise(text: str) -> ch.NoiseConfig:
    """``default`` | ``none`` | four comma-separated numbers (p1, p2, zz angle, z angle)."""
    text = text.strip().lower()
    if text == "default":
        return ch.NoiseConfig()
    if text == "none":
        return ch.NoiseConfig.none()
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad noise spec {text!r}") from exc
    if len(values) != 4:
        raise ConfigError("noise needs 'default', 'none' or four comma-separated numbers")
    return ch.NoiseConfig(*values)


def _convert(kind, name: str, raw):
    try:
        return kind(raw)
    except (TypeError, ValueError, FidelityForgeError) as exc:
        raise ConfigError(f"bad value {raw!r} for {name}") from exc


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then preset (optimize only), then config file, then flags."""
    spec = {**COMMON, **OPTIONS[command]}
    values = {k: default for k, (_, default) in spec.items()}
    file_values: dict = {}
    if args.config:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(args.config) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        for section in parser.sections():
            if section not in ("run", command) and section not in OPTIONS:
                raise ConfigError(f"unknown section [{section}]")
            if section not in ("run", command):
                continue
            for key, raw in parser.items(section):
                key = key.replace("-", "_")
                allowed = COMMON if section == "run" else spec
                if key not in allowed:
                    raise ConfigError(f"unknown key {key!r} in [{section}]")
                file_values[key] = _convert(spec[key][0], key, raw)
    flag_values = {k: getattr(args, k) for k in spec if getattr(args, k, None) is not None}
    if command == "optimize":
        name = flag_values.get("preset", file_values.get("preset", values["preset"]))
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        base = PRESETS[name]
        for key in ("iterations", "l", "m", "initial_probes"):
            values[key] = getattr(base, key)
        values["mode"] = base.mode.value
    values.update(file_values)
    values.update(flag_values)
    return values


def echo(command: str, values: dict) -> list[str]:
    lines = [f"# fidelity-forge {command}"]
    lines += [f"# {k} = {values[k]}" for k in sorted(values) if k != "threads"]
    return lines


# ---------------------------------------------------------- channel sources


@dataclass(frozen=True)
class Source:
    unitary: np.ndarray
    generator: np.ndarray | None


def _read_circuit(path: str) -> ch.CircuitSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read circuit file {path}: {exc}") from exc
    n, gates = None, []
    for line in text.splitlines():
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        head = parts[0].lower()
        try:
            if head == "qubits" and len(parts) == 2:
                n = int(parts[1])
            elif head == "u3" and len(parts) == 5:
                gates.append(ch.U3(int(parts[1]), *(float(p) for p in parts[2:])))
            elif head == "cnot" and len(parts) == 3:
                gates.append(ch.CNOT(int(parts[1]), int(parts[2])))
            else:
                raise ValueError
        except ValueError as exc:
            raise ConfigError(f"bad circuit line {line!r}") from exc
    if n is None:
        used = [g.qubit for g in gates if isinstance(g, ch.U3)]
        used += [q for g in gates if isinstance(g, ch.CNOT) for q in g]
        n = max(used, default=0) + 1
    return ch.CircuitSpec(n, gates)


def source(text: str, qubits: int, target: Source | None = None) -> Source:
    """Resolve one channel-source expression."""
    text = text.strip()
    if text.startswith("perturb:"):
        inner, sep, eps = text[len("perturb:") :].rpartition(":eps=")
        if not sep:
            raise ConfigError(f"perturb source needs ':eps=<x>': {text!r}")
        if target is None:
            raise ConfigError("perturb sources are only valid for --compare")
        gen = source(inner, qubits).generator
        if gen is None:
            raise ConfigError(f"{inner!r} has no generator to perturb with")
        if gen.shape != target.unitary.shape:
            raise ConfigError("perturbation generator and target differ in size")
        return Source(ch.perturbed_unitary(target.unitary, gen, _convert(float, "eps", eps)), None)
    if text.startswith("seed:"):
        k = _convert(int, "seed source", text[5:])
        _, h = ch.random_hermitian(qubits, np.random.default_rng(k))
        return Source(ch.unitary_from_generator(h), h)
    if text.startswith("circuit:"):
        return Source(ch.circuit_unitary(_read_circuit(text[8:])), None)
    if text in ch.COEFFICIENT_TABLES:
        h = ch.hermitian_from_coeffs(ch.load_coefficients(text))
        return Source(ch.unitary_from_generator(h), h)
    if text in ch.CIRCUIT_TABLES:
        return Source(ch.fixture_unitary(text), None)
    raise ConfigError(f"unknown channel source {text!r}")


def channel_pair(target: str, compare: str, qubits: int) -> tuple[ch.Channel, ch.Channel]:
    t = source(target, qubits)
    c = source(compare, qubits, t)
    if t.unitary.shape != c.unitary.shape:
        raise ConfigError("target and comparison channels act on different qubit counts")
    return ch.unitary_channel(t.unitary), ch.unitary_channel(c.unitary)


# ---------------------------------------------------------------- commands


def _fmt(x: float) -> str:
    return repr(float(x))


def cmd_exact(values: dict) -> tuple[int, list[str]]:
    lam, gam = channel_pair(values["target"], values["compare"], values["qubits"])
    ks = k_fidelities(lam, gam)
    lines = ["quantity,value", f"F,{_fmt(process_fidelity_exact(lam, gam))}", f"F0,{_fmt(zero_fidelity(lam, gam))}"]
    lines += [f"F{k},{_fmt(v)}" for k, v in enumerate(ks) if k > 0]
    return EXIT_OK, lines


def sweep_rows(qubits: int, samples: int, eps_min: float, eps_max: float, seed: int, fixed_target: bool):
    """Random unitary pairs with evenly spaced perturbation strengths.

    Sample ``s`` draws its target generator from ``stream(seed, 0, s)`` (or
    ``stream(seed, 0, 0)`` for every sample when ``fixed_target``) and its
    perturbation generator from ``stream(seed, 1, s)``.
    """
    eps = np.linspace(eps_min, eps_max, samples) if samples > 1 else np.array([eps_min])
    for s, e in enumerate(eps):
        _, h_t = ch.random_hermitian(qubits, stream(seed, 0, 0 if fixed_target else s))
        _, h_r = ch.random_hermitian(qubits, stream(seed, 1, s))
        u_t = ch.unitary_from_generator(h_t)
        lam = ch.unitary_channel(u_t)
        gam = ch.unitary_channel(ch.perturbed_unitary(u_t, h_r, e))
        yield float(e), process_fidelity_exact(lam, gam), zero_fidelity(lam, gam), k_fidelities(lam, gam)


def cmd_sweep(values: dict) -> tuple[int, list[str]]:
    n, samples = values["qubits"], values["samples"]
    if not 1 <= n <= 5:
        raise ConfigError("sweep supports 1 to 5 qubits")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    lines = ["epsilon,F,F0" + "".join(f",F{k}" for k in range(1, n + 1))]
    rows = sweep_rows(n, samples, values["eps_min"], values["eps_max"], values["seed"], bool(values["fixed_target"]))
    for e, f, f0, ks in rows:
        # the k = 0 truncation differs from F0 by (5/4)**n, so F0 is reported directly
        lines.append(",".join([_fmt(e), _fmt(f), _fmt(f0)] + [_fmt(v) for v in ks[1:]]))
    return EXIT_OK, lines


def cmd_benchmark(values: dict) -> tuple[int, list[str]]:
    if values["reps"] < 10:
        raise ConfigError("benchmark needs reps >= 10")
    if values["schedule"]:
        try:
            schedule = parse_schedule(Path(values["schedule"]).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read schedule: {exc}") from exc
    else:
        schedule = default_schedule()
    lam, gam = channel_pair(values["target"], values["compare"], values["qubits"])
    for row in schedule:
        try:
            row.validate(lam.dim)
        except FidelityForgeError as exc:
            raise ConfigError(str(exc)) from exc
    rows = benchmark_estimators(lam, gam, schedule, values["reps"], values["seed"], values["threads"])
    lines = [BENCHMARK_HEADER] + [r.csv() for r in rows]
    bad = [r for r in rows if not r.in_band]
    for r in bad:
        print(f"sanity band violated: budget {r.budget} {r.kind.value} std {r.empirical_std:.4g}", file=sys.stderr)
    return (EXIT_BAND if bad else EXIT_OK), lines


def optimization_config(values: dict) -> OptimizationConfig:
    try:
        return OptimizationConfig(
            iterations=values["iterations"],
            l=values["l"],
            m=values["m"],
            mode=Mode(values["mode"]),
            initial_probes=values["initial_probes"],
            noise=_parse_noise(values["noise"]),
            seed=values["seed"],
        )
    except FidelityForgeError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_optimize(values: dict) -> tuple[int, list[str]]:
    trace = run_optimization(optimization_config(values))
    return EXIT_OK, trace.csv_lines()


COMMANDS = {"exact": cmd_exact, "sweep": cmd_sweep, "benchmark": cmd_benchmark, "optimize": cmd_optimize}


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [run] and per-command sections")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, help="worker threads (env FIDELITY_FORGE_THREADS)")
    common.add_argument("--output", "-o", help="write CSV here instead of standard output")

    parser = argparse.ArgumentParser(prog="fidelity-forge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", parents=[common], help="exact F, F0 and k-fidelities of a pair")
    p.add_argument("--qubits", type=int)
    p.add_argument("--target")
    p.add_argument("--compare")

    p = sub.add_parser("sweep", parents=[common], help="random pairs over a range of perturbations")
    p.add_argument("--qubits", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--eps-min", dest="eps_min", type=float)
    p.add_argument("--eps-max", dest="eps_max", type=float)
    p.add_argument("--fixed-target", dest="fixed_target", action="store_const", const=1)

    p = sub.add_parser("benchmark", parents=[common], help="projective estimator spread over a budget schedule")
    p.add_argument("--reps", type=int)
    p.add_argument("--schedule", help="custom schedule file (default: bundled schedule)")
    p.add_argument("--qubits", type=int)
    p.add_argument("--target")
    p.add_argument("--compare")

    p = sub.add_parser("optimize", parents=[common], help="Bayesian optimization of the dressed CNOT")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--iters", "--iterations", dest="iterations", type=int)
    p.add_argument("--l", dest="l", type=int)
    p.add_argument("--m", dest="m", type=int)
    p.add_argument("--mode", choices=[m.value for m in (Mode.FULL_TRACE, Mode.PROJECTIVE)])
    p.add_argument("--probes", dest="initial_probes", type=int)
    p.add_argument("--noise", help="'default', 'none' or 'p1,p2,zz,z'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = resolve(args.command, args)
        values["threads"] = resolve_threads(values["threads"] or None)
        code, body = COMMANDS[args.command](values)
    except (ConfigError, FidelityForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = "\n".join(echo(args.command, values) + body) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
