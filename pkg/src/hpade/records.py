"""Run-directory persistence: one structured text record per n.

Line-oriented key/value text with hex-float encodings, so every
high-precision binary value round-trips exactly.  Records are the only
source of truth for report generation; analyses are pure functions of
them.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import mpmath as mp

from .coefficients import (Coefficient, decode_coefficient,
                           encode_coefficient, mpf_from_hex, mpf_to_hex)
from .errors import ConfigError
from .roots import RootSet
from .series import MultiIndex
from .solver import DenominatorSolution, HPApproximant

RECORD_VERSION = 1


@dataclass
class RunRecord:
    """Everything persisted for one row index n."""

    approx: HPApproximant
    rootset: RootSet
    method: str

    @property
    def n(self):
        return self.approx.n


def record_path(run_dir, n):
    return os.path.join(run_dir, "records", f"n_{n:05d}.txt")


def encode_record(rec: RunRecord) -> str:
    a = rec.approx
    lines = [
        f"record_version {RECORD_VERSION}",
        f"n {a.n}",
        "m " + " ".join(str(e) for e in a.m.entries),
        f"precision_bits {a.precision_bits}",
        f"normalization {a.denominator.normalization}",
        f"method {rec.method}",
        f"nullspace_dim {a.denominator.nullspace_dim}",
        f"degenerate {int(a.denominator.degenerate)}",
        f"pivot_index {a.denominator.pivot_index}",
        f"solver_residual {mpf_to_hex(a.denominator.residual)}",
        f"window_residual {mpf_to_hex(a.residual)}",
        "q " + " ".join(encode_coefficient(c) for c in a.denominator.q),
    ]
    for k, p in enumerate(a.numerators):
        lines.append(f"p{k} " + " ".join(encode_coefficient(c) for c in p))
    rs = rec.rootset
    lines.append(f"degree_drop {rs.degree_drop}")
    lines.append(f"origin_order {rs.origin_order}")
    for r, mult in zip(rs.roots, rs.multiplicities):
        lines.append("root "
                     + mpf_to_hex(r.real) + " "
                     + mpf_to_hex(r.imag) + f" {mult}")
    return "\n".join(lines) + "\n"


def decode_record(text: str) -> RunRecord:
    fields = {}
    numerators = {}
    roots, mults = [], []
    for line in text.splitlines():
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        if key == "root":
            re_s, im_s, mult_s = rest.split()
            re_v = mpf_from_hex(re_s)
            im_v = mpf_from_hex(im_s)
            with mp.workprec(max(64, re_v._mpf_[3], im_v._mpf_[3]) + 8):
                roots.append(mp.mpc(re_v, im_v))
            mults.append(int(mult_s))
        elif key.startswith("p") and key[1:].isdigit():
            numerators[int(key[1:])] = [decode_coefficient(t)
                                        for t in rest.split()] if rest.strip() \
                else [Coefficient.zero()]
        else:
            fields[key] = rest
    version = int(fields["record_version"])
    if version != RECORD_VERSION:
        raise ConfigError(
            f"record version {version} does not match supported {RECORD_VERSION}")
    n = int(fields["n"])
    m = MultiIndex([int(t) for t in fields["m"].split()])
    prec = int(fields["precision_bits"])
    with mp.workprec(prec + 32):
        q = [decode_coefficient(t) for t in fields["q"].split()]
        den = DenominatorSolution(
            q=q,
            nullspace_dim=int(fields["nullspace_dim"]),
            residual=mpf_from_hex(fields["solver_residual"]),
            normalization=fields["normalization"],
            exact=all(c.exact for c in q),
            pivot_index=int(fields["pivot_index"]),
            degenerate=bool(int(fields["degenerate"])),
        )
        ps = [numerators[k] for k in sorted(numerators)]
        approx = HPApproximant(n, m, den, ps,
                               mpf_from_hex(fields["window_residual"]), prec)
    nominal = sum(mults) + int(fields["degree_drop"]) + int(fields["origin_order"])
    rootset = RootSet(roots, mults, int(fields["degree_drop"]),
                      int(fields["origin_order"]), nominal, [])
    return RunRecord(approx, rootset, fields.get("method", "unknown"))


def write_record(run_dir, rec: RunRecord):
    path = record_path(run_dir, rec.n)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(encode_record(rec))
    return os.path.relpath(path, run_dir)


def load_records(run_dir, manifest) -> list:
    out = []
    missing = []
    for n_s, rel in sorted(manifest["records"].items(), key=lambda kv: int(kv[0])):
        path = os.path.join(run_dir, rel)
        if not os.path.exists(path):
            missing.append(rel)
            continue
        with open(path) as fh:
            out.append(decode_record(fh.read()))
    if missing:
        raise ConfigError("missing record files: " + ", ".join(missing))
    return out


def write_manifest(run_dir, manifest):
    path = os.path.join(run_dir, "manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_manifest(run_dir):
    path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(path):
        raise ConfigError(f"no manifest.json in {run_dir}")
    with open(path) as fh:
        manifest = json.load(fh)
    if manifest.get("record_version") != RECORD_VERSION:
        raise ConfigError("manifest record version mismatch")
    return manifest
