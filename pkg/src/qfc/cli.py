"""Command-line front end: ``qfc <subcommand> [flags]``.

The drive is fixed by exactly one of ``--mu``, ``--n0`` or ``--pump``. With
``--mu`` the flag ``--delta`` is the effective detuning Delta = delta - g n0;
with ``--n0`` or ``--pump`` it is the laser detuning delta. Everything is in
natural units (hbar = m = gamma = 1 unless ``--gamma`` says otherwise).

Settings can also come from a ``key = value`` file given by ``--config``;
explicit flags override it.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from typing import List, Optional

import numpy as np

from . import __version__
from .bogoliubov import classify, epsilon, omega
from .correlations import langevin_oracle, ode_steady_oracle, steady_moments
from .errors import QFCError
from .imperfections import disorder_response, noise_budget, thermal_degradation
from .params import PhysicalParams, density_branches, mean_field_state, steady_state
from .spatial import FilterConfig, RadialGrid, g2_map
from .upb import InterferenceConfig, g2_delay, optimal_config, upb_scan

UNITS = ("hbar = m = 1; k in sqrt(m gamma), energies in gamma, x in 1/sqrt(m gamma), "
         "tau in 1/gamma")

SUBCOMMANDS = ("mean-field", "spectrum", "upb-scan", "g2-tau", "g2-map", "disorder",
               "noise-budget", "oracle")


class ConfigError(QFCError, ValueError):
    """One or more invalid settings; ``problems`` lists all of them."""

    def __init__(self, problems: List[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class RunConfig:
    subcommand: str = "mean-field"
    mu: Optional[float] = None
    delta: float = 0.0
    gamma: float = 1.0
    mg: float = 1e-4
    n0: Optional[float] = None
    pump: Optional[float] = None
    branch: Optional[str] = None
    kmin: float = 0.0
    kmax: float = 4.0
    nk: int = 101
    k: Optional[float] = None
    tmax: float = 10.0
    nt: int = 201
    xmax: float = 6.0
    nx: int = 120
    nquad: int = 4096
    kcut: Optional[float] = None
    filter: float = 0.0
    eta: Optional[float] = None
    alpha: Optional[float] = None
    vk: float = 1.0
    vrms: Optional[float] = None
    corr_volume: Optional[float] = None
    gamma_deph: Optional[float] = None
    lambda_db: Optional[float] = None
    n_inc: Optional[float] = None
    seed: int = 0
    ntraj: int = 10000
    dt: Optional[float] = None
    out: str = "-"
    format: str = "csv"

    def validate(self):
        p = []
        if self.subcommand not in SUBCOMMANDS:
            p.append(f"unknown subcommand {self.subcommand!r}")
        drives = [name for name in ("mu", "n0", "pump") if getattr(self, name) is not None]
        if len(drives) != 1:
            p.append(f"exactly one of mu, n0, pump must be given (got {drives or 'none'})")
        for name in ("mu", "n0", "pump"):
            v = getattr(self, name)
            if v is not None and v < 0:
                p.append(f"{name} must be >= 0")
        if not self.gamma > 0:
            p.append("gamma must be > 0")
        if self.mg < 0:
            p.append("mg must be >= 0")
        if self.branch not in (None, "low", "middle", "high", "single"):
            p.append("branch must be low, middle, high or single")
        if not self.kmax > self.kmin:
            p.append("k grid must be increasing (kmax > kmin)")
        if self.kmin < 0:
            p.append("kmin must be >= 0")
        for name, lo in (("nk", 1), ("nt", 2), ("nx", 2), ("nquad", 2), ("ntraj", 1)):
            if getattr(self, name) < lo:
                p.append(f"{name} must be >= {lo}")
        if not self.tmax > 0:
            p.append("tmax must be > 0")
        if not self.xmax > 0:
            p.append("xmax must be > 0")
        if self.kcut is not None and not self.kcut > 0:
            p.append("kcut must be > 0")
        if not 0.0 <= self.filter <= 1.0:
            p.append("filter must lie in [0, 1]")
        if self.alpha is not None and self.alpha < 0:
            p.append("alpha must be >= 0")
        if self.k is not None and self.k < 0:
            p.append("k must be >= 0")
        for name in ("vrms", "corr_volume", "gamma_deph", "lambda_db", "n_inc"):
            v = getattr(self, name)
            if v is not None and v < 0:
                p.append(f"{name} must be >= 0")
        if self.dt is not None and not self.dt > 0:
            p.append("dt must be > 0")
        if self.seed < 0:
            p.append("seed must be >= 0")
        if self.format not in ("csv", "json"):
            p.append("format must be csv or json")
        if self.subcommand == "g2-tau" and self.k is None:
            p.append("g2-tau needs --k")
        if p:
            raise ConfigError(p)
        return self

    def resolved(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    if raw.lower() in ("none", "") and "Optional" in kind:
        return None
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    return raw


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out, problems = {}, []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                problems.append(f"{path}:{lineno}: expected key = value")
                continue
            key, raw = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _TYPES or key == "subcommand":
                problems.append(f"{path}:{lineno}: unknown key {key!r}")
                continue
            try:
                out[key] = _convert(key, raw)
            except ValueError:
                problems.append(f"{path}:{lineno}: bad value {raw!r} for {key}")
    if problems:
        raise ConfigError(problems)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfc", description="Quantum statistics of a driven polariton fluid.")
    parser.add_argument("--version", action="version", version=f"qfc {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value settings file")
    for f in fields(RunConfig):
        if f.name == "subcommand":
            continue
        flag = "--" + f.name.replace("_", "-")
        kind = int if "int" in f.type else float if "float" in f.type else str
        common.add_argument(flag, dest=f.name, type=kind, default=argparse.SUPPRESS)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    settings = {}
    path = ns.pop("config", None)
    if path:
        settings.update(read_config_file(path))
    settings.update(ns)
    return RunConfig(**settings).validate()


# -------------------------------------------------------------- state & grids

def _state(cfg: RunConfig):
    if cfg.mu is not None:
        return steady_state(cfg.mu, cfg.delta, gamma=cfg.gamma, mg=cfg.mg)
    params = PhysicalParams(g=cfg.mg, delta=cfg.delta, gamma=cfg.gamma)
    if cfg.n0 is not None:
        return mean_field_state(params, cfg.n0)
    states = density_branches(params.with_pump(cfg.pump))
    if cfg.branch is not None:
        for s in states:
            if s.branch == cfg.branch:
                return s
        raise ConfigError([f"branch {cfg.branch!r} does not exist for this pump"])
    stable = [s for s in states if s.stable]
    return max(stable or states, key=lambda s: s.n0)


def _kgrid(cfg):
    return np.linspace(cfg.kmin, cfg.kmax, cfg.nk)


def _tgrid(cfg):
    return np.linspace(0.0, cfg.tmax, cfg.nt)


def _xgrid(cfg):
    return np.linspace(0.0, cfg.xmax, cfg.nx)


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


# --------------------------------------------------------------- subcommands

def run_mean_field(cfg):
    if cfg.pump is not None:
        params = PhysicalParams(g=cfg.mg, delta=cfg.delta, gamma=cfg.gamma, pump=cfg.pump)
        states = density_branches(params)
    else:
        states = [_state(cfg)]
    return {"branches": [s.summary() for s in states]}


def run_spectrum(cfg):
    mf = _state(cfg)
    ks = _kgrid(cfg)
    w = np.atleast_1d(omega(ks, mf))
    eps = np.atleast_1d(epsilon(ks, mf))
    cls = [str(classify(k, mf)) for k in ks]
    cols = ["k", "epsilon", "re_omega", "im_omega_minus_half_gamma", "class"]
    rows = [[k, e, wk.real, wk.imag - mf.gamma / 2.0, c] for k, e, wk, c in zip(ks, eps, w, cls)]
    return cols, rows


def run_upb_scan(cfg):
    mf = _state(cfg)
    cols = ["k", "n", "abs_c", "arg_c", "n_th", "r", "alpha_opt", "eta_opt", "g2_opt"]
    rows = []
    for r in upb_scan(mf, _kgrid(cfg)):
        c = complex(r["c_re"], r["c_im"])
        rows.append([r["k"], r["n"], abs(c), cmath.phase(c), r["n_th"], r["r"],
                     r["alpha_opt"], r["eta_opt"], r["g2_opt"]])
    return cols, rows


def run_g2_tau(cfg):
    mf = _state(cfg)
    best = None
    if cfg.alpha is None or cfg.eta is None:
        best = optimal_config(mf, cfg.k)
    alpha = best.alpha_bar if cfg.alpha is None else cfg.alpha
    eta = best.eta if cfg.eta is None else cfg.eta
    conf = InterferenceConfig(k=cfg.k, alpha_bar=alpha, zeta=-0.5 * eta)
    taus = _tgrid(cfg)
    g = np.atleast_1d(g2_delay(mf, conf, taus))
    return ["tau", "g2"], [[t, v] for t, v in zip(taus, g)]


def run_g2_map(cfg):
    mf = _state(cfg)
    grid = RadialGrid(_xgrid(cfg), _tgrid(cfg), k_max=cfg.kcut, n_k=cfg.nquad)
    gm = g2_map(mf, FilterConfig(cfg.filter), grid)
    return gm


def run_disorder(cfg):
    mf = _state(cfg)
    modes = []
    for k in _kgrid(cfg):
        d = disorder_response(float(k), mf, cfg.vk)
        modes.append({"k": d.k, "dn": d.dn, "dn_closed": d.dn_closed, "mismatch": d.mismatch})
    rep = {"V_k": cfg.vk, "modes": modes}
    if cfg.vrms is not None and cfg.corr_volume is not None:
        rep["tolerance"] = noise_budget(mf, V_rms=cfg.vrms, corr_volume=cfg.corr_volume).to_dict()
    return rep


def run_noise_budget(cfg):
    mf = _state(cfg)
    budget = noise_budget(mf, V_rms=cfg.vrms, corr_volume=cfg.corr_volume,
                          gamma_deph=cfg.gamma_deph, lambda_db=cfg.lambda_db, n_inc=cfg.n_inc)
    rep = {"budget": budget.to_dict()}
    if cfg.n_inc is not None and cfg.k is not None:
        try:
            rep["thermal"] = thermal_degradation(steady_moments(cfg.k, mf), cfg.n_inc)
        except QFCError as exc:
            rep["thermal"] = {"error": type(exc).__name__, "message": str(exc)}
    return rep


def run_oracle(cfg):
    mf = _state(cfg)
    cols = ["k", "n_closed", "n_ode", "n_mc", "n_mc_se", "c_re_closed", "c_re_ode", "c_re_mc",
            "c_re_mc_se", "c_im_closed", "c_im_ode", "c_im_mc", "c_im_mc_se"]
    rows = []
    for k in _kgrid(cfg):
        k = float(k)
        cf = steady_moments(k, mf)
        od = ode_steady_oracle(k, mf)
        mc = langevin_oracle(k, mf, n_traj=cfg.ntraj, seed=cfg.seed, dt=cfg.dt)
        rows.append([k, cf.n, od.n, mc.n, mc.n_se,
                     complex(cf.c).real, complex(od.c).real, mc.c.real, mc.c_se.real,
                     complex(cf.c).imag, complex(od.c).imag, mc.c.imag, mc.c_se.imag])
    return cols, rows


# -------------------------------------------------------------------- output

def _header(cfg) -> List[str]:
    lines = [f"qfc {cfg.subcommand} (version {__version__})", f"units: {UNITS}"]
    lines += [f"{k} = {'none' if v is None else _fmt(v)}" for k, v in cfg.resolved().items()]
    return lines


def render(cfg: RunConfig, result) -> str:
    """Text of the output file for a subcommand result."""
    head = _header(cfg)
    if isinstance(result, dict):
        doc = {"config": cfg.resolved(), "units": UNITS, "result": result}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    if cfg.format == "json":
        if isinstance(result, tuple):
            cols, rows = result
            body = [dict(zip(cols, r)) for r in rows]
        else:
            body = {"x": list(result.x), "tau": list(result.tau), "g2": result.g2.tolist()}
        doc = {"config": cfg.resolved(), "units": UNITS, "result": body}
        return json.dumps(_jsonable(doc), indent=2) + "\n"
    out = [f"# {h}" for h in head]
    if isinstance(result, tuple):
        cols, rows = result
        out.append(",".join(cols))
        out += [",".join(_fmt(v) for v in r) for r in rows]
    else:
        # dense map: first row holds tau, first column holds x
        out.append("# rows: x, columns: tau")
        out.append(",".join(["x\\tau"] + [_fmt(t) for t in result.tau]))
        for x, row in zip(result.x, result.g2):
            out.append(",".join([_fmt(x)] + [_fmt(v) for v in row]))
    return "\n".join(out) + "\n"


def write_atomic(path: str, text: str):
    """Write via a temporary file in the target directory, then rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qfc-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


RUNNERS = {
    "mean-field": run_mean_field,
    "spectrum": run_spectrum,
    "upb-scan": run_upb_scan,
    "g2-tau": run_g2_tau,
    "g2-map": run_g2_map,
    "disorder": run_disorder,
    "noise-budget": run_noise_budget,
    "oracle": run_oracle,
}


def _fail(exc: BaseException, code: int) -> int:
    err = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ConfigError):
        err["problems"] = exc.problems
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        return _fail(exc, 2)
    except OSError as exc:
        return _fail(exc, 2)
    try:
        text = render(cfg, RUNNERS[cfg.subcommand](cfg))
        if cfg.out == "-":
            try:
                sys.stdout.write(text)
                sys.stdout.flush()
            except BrokenPipeError:
                # reader went away (e.g. piped into head); not an error
                os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
                return 0
        else:
            write_atomic(cfg.out, text)
    except ConfigError as exc:
        return _fail(exc, 2)
    except (QFCError, ValueError, OSError) as exc:
        return _fail(exc, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
