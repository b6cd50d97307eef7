#!/usr/bin/env python3
"""Generate the molecular integral fixtures checked into fixtures/.

Self-contained restricted Hartree-Fock over contracted Gaussian bases
(McMurchie-Davidson integrals, s and p shells), followed by an exact
diagonalization of the active-space Hamiltonian to record reference
energies. Emits FCIDUMP files (chemists' notation, MO basis) plus a
sidecar JSON with provenance metadata.

Requires only numpy and scipy. Run from the repository root:

    python3 fixtures/generate.py

The checked-in fixtures were produced by this exact script; regenerate
only if you change a geometry or basis below.
"""

import itertools
import json
import math
import os

import numpy as np
from scipy.special import hyp1f1

ANGSTROM_TO_BOHR = 1.0 / 0.52917721067

# ---------------------------------------------------------------------------
# Basis set data (Basis Set Exchange, Gaussian94 format values)
# ---------------------------------------------------------------------------

STO3G_H = [
    ("s", [3.42525091, 0.62391373, 0.16885540],
     [0.15432897, 0.53532814, 0.44463454]),
]

STO3G_LI = [
    ("s", [16.1195750, 2.9362007, 0.7946505],
     [0.15432897, 0.53532814, 0.44463454]),
    ("sp", [0.6362897, 0.1478601, 0.0480887],
     ([-0.09996723, 0.39951283, 0.70011547],
      [0.15591627, 0.60768372, 0.39195739])),
]

G631_H = [
    ("s", [18.7311370, 2.8253937, 0.6401217],
     [0.03349460, 0.23472695, 0.81375733]),
    ("s", [0.1612778], [1.0]),
]

BASES = {
    ("H", "sto-3g"): STO3G_H,
    ("Li", "sto-3g"): STO3G_LI,
    ("H", "6-31g"): G631_H,
}

CHARGES = {"H": 1, "Li": 3}


def build_shells(atoms, basis_name):
    """Expand per-atom shell data into a list of contracted AO functions.

    Each AO is (center, lmn, [(exp, coef)...]) with normalized primitives
    and overall contraction normalization.
    """
    aos = []
    for (elem, center) in atoms:
        for shell in BASES[(elem, basis_name)]:
            kind, exps = shell[0], shell[1]
            if kind == "s":
                coefs = shell[2]
                aos.append(_contracted(center, (0, 0, 0), exps, coefs))
            elif kind == "sp":
                s_coefs, p_coefs = shell[2]
                aos.append(_contracted(center, (0, 0, 0), exps, s_coefs))
                for lmn in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
                    aos.append(_contracted(center, lmn, exps, p_coefs))
            else:
                raise ValueError(kind)
    return aos


def _prim_norm(a, lmn):
    l, m, n = lmn
    df = lambda k: math.prod(range(2 * k - 1, 0, -2)) if k > 0 else 1
    return ((2 * a / math.pi) ** 0.75 * (4 * a) ** ((l + m + n) / 2.0)
            / math.sqrt(df(l) * df(m) * df(n)))


def _contracted(center, lmn, exps, coefs):
    prims = [(a, c * _prim_norm(a, lmn)) for a, c in zip(exps, coefs)]
    # normalize the contraction
    s = 0.0
    for (a, ca) in prims:
        for (b, cb) in prims:
            s += ca * cb * _prim_overlap(a, lmn, (0, 0, 0), b, lmn, (0, 0, 0))
    scale = 1.0 / math.sqrt(s)
    return (np.asarray(center, float), lmn,
            [(a, c * scale) for (a, c) in prims])


# ---------------------------------------------------------------------------
# McMurchie-Davidson one- and two-electron integrals
# ---------------------------------------------------------------------------

def _e_coef(i, j, t, qx, a, b):
    """Hermite expansion coefficient E_t^{ij}."""
    p = a + b
    q = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-q * qx * qx)
    if j == 0:
        return (_e_coef(i - 1, j, t - 1, qx, a, b) / (2 * p)
                - q * qx / a * _e_coef(i - 1, j, t, qx, a, b)
                + (t + 1) * _e_coef(i - 1, j, t + 1, qx, a, b))
    return (_e_coef(i, j - 1, t - 1, qx, a, b) / (2 * p)
            + q * qx / b * _e_coef(i, j - 1, t, qx, a, b)
            + (t + 1) * _e_coef(i, j - 1, t + 1, qx, a, b))


def _prim_overlap(a, lmn1, apos_rel, b, lmn2, bpos_rel, ab=None):
    if ab is None:
        ab = np.zeros(3)
    p = a + b
    out = (math.pi / p) ** 1.5
    for k in range(3):
        out *= _e_coef(lmn1[k], lmn2[k], 0, ab[k], a, b)
    return out


def overlap(ao1, ao2):
    (ra, lmn1, pa), (rb, lmn2, pb) = ao1, ao2
    ab = ra - rb
    return sum(ca * cb * _prim_overlap(a, lmn1, None, b, lmn2, None, ab)
               for (a, ca) in pa for (b, cb) in pb)


def kinetic(ao1, ao2):
    (ra, lmn1, pa), (rb, lmn2, pb) = ao1, ao2
    ab = ra - rb

    def prim_kin(a, b):
        l2, m2, n2 = lmn2
        term0 = b * (2 * (l2 + m2 + n2) + 3) * \
            _prim_overlap(a, lmn1, None, b, lmn2, None, ab)
        term1 = -2 * b * b * sum(
            _prim_overlap(a, lmn1, None, b, _bump(lmn2, k, 2), None, ab)
            for k in range(3))
        term2 = -0.5 * sum(
            lmn2[k] * (lmn2[k] - 1)
            * _prim_overlap(a, lmn1, None, b, _bump(lmn2, k, -2), None, ab)
            for k in range(3))
        return term0 + term1 + term2

    return sum(ca * cb * prim_kin(a, b) for (a, ca) in pa for (b, cb) in pb)


def _bump(lmn, k, d):
    out = list(lmn)
    out[k] += d
    if out[k] < 0:
        # overlap with negative angular momentum is zero; flag via None-safe path
        return (-1, 0, 0)  # E coefficients return 0 for i<0 handled below
    return tuple(out)


def boys(n, x):
    return hyp1f1(n + 0.5, n + 1.5, -x) / (2.0 * n + 1.0)


def _r_coef(t, u, v, n, p, pc):
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        return (-2.0 * p) ** n * boys(n, p * float(np.dot(pc, pc)))
    if t > 0:
        return ((t - 1) * _r_coef(t - 2, u, v, n + 1, p, pc)
                + pc[0] * _r_coef(t - 1, u, v, n + 1, p, pc))
    if u > 0:
        return ((u - 1) * _r_coef(t, u - 2, v, n + 1, p, pc)
                + pc[1] * _r_coef(t, u - 1, v, n + 1, p, pc))
    return ((v - 1) * _r_coef(t, u, v - 2, n + 1, p, pc)
            + pc[2] * _r_coef(t, u, v - 1, n + 1, p, pc))


def nuclear(ao1, ao2, atoms):
    (ra, lmn1, pa), (rb, lmn2, pb) = ao1, ao2
    ab = ra - rb
    out = 0.0
    for (a, ca) in pa:
        for (b, cb) in pb:
            p = a + b
            rp = (a * ra + b * rb) / p
            for elem, rc in atoms:
                z = CHARGES[elem]
                pc = rp - np.asarray(rc)
                s = 0.0
                for t in range(lmn1[0] + lmn2[0] + 1):
                    for u in range(lmn1[1] + lmn2[1] + 1):
                        for v in range(lmn1[2] + lmn2[2] + 1):
                            e = (_e_coef(lmn1[0], lmn2[0], t, ab[0], a, b)
                                 * _e_coef(lmn1[1], lmn2[1], u, ab[1], a, b)
                                 * _e_coef(lmn1[2], lmn2[2], v, ab[2], a, b))
                            s += e * _r_coef(t, u, v, 0, p, pc)
                out -= z * ca * cb * 2 * math.pi / p * s
    return out


def eri(ao1, ao2, ao3, ao4):
    """Two-electron repulsion integral (ao1 ao2 | ao3 ao4), chemists'."""
    (ra, l1, pa), (rb, l2, pb) = ao1, ao2
    (rc, l3, pc), (rd, l4, pd) = ao3, ao4
    ab, cd = ra - rb, rc - rd
    out = 0.0
    for (a, ca) in pa:
        for (b, cb) in pb:
            p = a + b
            rp = (a * ra + b * rb) / p
            e1 = [[[_e_coef(l1[k], l2[k], t, ab[k], a, b)
                    for t in range(l1[k] + l2[k] + 1)] for k in range(3)]]
            for (c, cc) in pc:
                for (d, cdd) in pd:
                    q = c + d
                    rq = (c * rc + d * rd) / q
                    alpha = p * q / (p + q)
                    pq = rp - rq
                    s = 0.0
                    for t in range(l1[0] + l2[0] + 1):
                        for u in range(l1[1] + l2[1] + 1):
                            for v in range(l1[2] + l2[2] + 1):
                                e_bra = (_e_coef(l1[0], l2[0], t, ab[0], a, b)
                                         * _e_coef(l1[1], l2[1], u, ab[1], a, b)
                                         * _e_coef(l1[2], l2[2], v, ab[2], a, b))
                                if e_bra == 0.0:
                                    continue
                                for tt in range(l3[0] + l4[0] + 1):
                                    for uu in range(l3[1] + l4[1] + 1):
                                        for vv in range(l3[2] + l4[2] + 1):
                                            e_ket = (_e_coef(l3[0], l4[0], tt, cd[0], c, d)
                                                     * _e_coef(l3[1], l4[1], uu, cd[1], c, d)
                                                     * _e_coef(l3[2], l4[2], vv, cd[2], c, d))
                                            if e_ket == 0.0:
                                                continue
                                            s += (e_bra * e_ket
                                                  * (-1) ** (tt + uu + vv)
                                                  * _r_coef(t + tt, u + uu, v + vv,
                                                            0, alpha, pq))
                    out += (ca * cb * cc * cdd
                            * 2 * math.pi ** 2.5
                            / (p * q * math.sqrt(p + q)) * s)
    return out


# ---------------------------------------------------------------------------
# RHF and integral transformation
# ---------------------------------------------------------------------------

def rhf(atoms, basis_name, n_elec, max_iter=200, tol=1e-12):
    aos = build_shells(atoms, basis_name)
    n = len(aos)
    s_mat = np.array([[overlap(aos[i], aos[j]) for j in range(n)] for i in range(n)])
    t_mat = np.array([[kinetic(aos[i], aos[j]) for j in range(n)] for i in range(n)])
    v_mat = np.array([[nuclear(aos[i], aos[j], atoms) for j in range(n)] for i in range(n)])
    h_core = t_mat + v_mat
    g = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if (i * (i + 1) // 2 + j) < (k * (k + 1) // 2 + l):
                        continue
                    val = eri(aos[i], aos[j], aos[k], aos[l])
                    for (a, b) in {(i, j), (j, i)}:
                        for (c, d) in {(k, l), (l, k)}:
                            g[a, b, c, d] = val
                            g[c, d, a, b] = val

    e_nuc = 0.0
    for (e1, r1), (e2, r2) in itertools.combinations(atoms, 2):
        e_nuc += CHARGES[e1] * CHARGES[e2] / np.linalg.norm(np.asarray(r1) - np.asarray(r2))

    n_occ = n_elec // 2
    # symmetric orthogonalization
    sval, svec = np.linalg.eigh(s_mat)
    x = svec @ np.diag(sval ** -0.5) @ svec.T

    d = np.zeros((n, n))
    e_old = 0.0
    for it in range(max_iter):
        j_mat = np.einsum("pqrs,rs->pq", g, d)
        k_mat = np.einsum("prqs,rs->pq", g, d)
        f = h_core + 2 * j_mat - k_mat
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        c_occ = c[:, :n_occ]
        d = c_occ @ c_occ.T
        e_elec = np.einsum("pq,pq->", d, h_core + f)
        if abs(e_elec - e_old) < tol and it > 2:
            break
        e_old = e_elec
    e_hf = e_elec + e_nuc

    # MO transform (chemists' ordering preserved)
    h_mo = c.T @ h_core @ c
    g_mo = np.einsum("pi,qj,pqrs,rk,sl->ijkl", c, c, g, c, c, optimize=True)
    return {
        "n_orb": n, "e_nuc": e_nuc, "e_hf": e_hf, "eps": eps,
        "h": h_mo, "g": g_mo,
    }


# ---------------------------------------------------------------------------
# Exact diagonalization in the (N_e, Sz=0) sector, singlet filtering
# ---------------------------------------------------------------------------

def sector_spectrum(h, g, e_core, n_elec):
    """Eigenvalues of the second-quantized H in the N_e sector, with <S^2>.

    Spin orbitals 0..n-1 are alpha, n..2n-1 beta (spin-blocked). Returns
    (eigenvalues, s2 expectations) for the full N_e sector.
    """
    n = h.shape[0]
    n_so = 2 * n
    dets = [x for x in range(1 << n_so) if bin(x).count("1") == n_elec]
    index = {x: i for i, x in enumerate(dets)}
    dim = len(dets)

    def apply_ladder(ops, x):
        """ops: list of (orb, dagger) applied right-to-left; returns (phase, y) or None."""
        phase = 1.0
        for orb, dag in reversed(ops):
            bit = 1 << orb
            occ = x & bit
            if dag:
                if occ:
                    return None
                parity = bin(x & (bit - 1)).count("1")
                phase *= (-1) ** parity
                x |= bit
            else:
                if not occ:
                    return None
                parity = bin(x & (bit - 1)).count("1")
                phase *= (-1) ** parity
                x &= ~bit
        return phase, x

    hmat = np.zeros((dim, dim))
    terms = []
    for p in range(n):
        for q in range(n):
            if h[p, q] != 0.0:
                for s in (0, n):
                    terms.append((h[p, q], [(p + s, 1), (q + s, 0)]))
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s_ in range(n):
                    val = 0.5 * g[p, q, r, s_]
                    if val == 0.0:
                        continue
                    for sp in (0, n):
                        for tp in (0, n):
                            terms.append((val, [(p + sp, 1), (r + tp, 1),
                                                (s_ + tp, 0), (q + sp, 0)]))
    for ci, x in enumerate(dets):
        for coef, ops in terms:
            res = apply_ladder(ops, x)
            if res is None:
                continue
            ph, y = res
            hmat[index[y], ci] += coef * ph
    hmat += e_core * np.eye(dim)

    # S^2 = S-S+ + Sz(Sz+1)
    s2 = np.zeros((dim, dim))
    for ci, x in exec_enum(dets):
        sz = 0.5 * (bin(x & ((1 << n) - 1)).count("1")
                    - bin(x >> n).count("1"))
        s2[ci, ci] += sz * (sz + 1)
        # S- S+ |x>
        for p in range(n):
            up = apply_ladder([(p, 1), (p + n, 0)], x)  # S+ piece a†_pα a_pβ
            if up is None:
                continue
            ph1, y = up
            for q in range(n):
                dn = apply_ladder([(q + n, 1), (q, 0)], y)  # S- piece a†_qβ a_qα
                if dn is None:
                    continue
                ph2, z = dn
                s2[index[z], ci] += ph1 * ph2
    evals, evecs = np.linalg.eigh(hmat)
    s2_exp = np.einsum("ij,ij->j", evecs, s2 @ evecs)
    return evals, s2_exp


def exec_enum(dets):
    return enumerate(dets)


def singlet_range(h, g, e_core, n_elec):
    evals, s2 = sector_spectrum(h, g, e_core, n_elec)
    mask = np.abs(s2) < 1e-6
    sel = evals[mask]
    return float(sel.min()), float(sel.max())


# ---------------------------------------------------------------------------
# Pauli 1-norm from integrals and HF-level spectral range
# ---------------------------------------------------------------------------

def one_norm(h, g):
    n = h.shape[0]
    t1 = 0.0
    for p in range(n):
        for q in range(n):
            t1 += abs(h[p, q] + g[p, q].trace() - 0.5 * g[p, :, :, q].trace())
    t2 = 0.0
    for p in range(n):
        for r in range(p):
            for s in range(n):
                for q in range(s):
                    t2 += abs(g[p, q, r, s] - g[p, s, r, q])
    t2 *= 0.5
    t3 = 0.25 * np.abs(g).sum()
    return t1 + t2 + t3


def hf_energy(h, g, na, nb):
    occ_a, occ_b = range(na), range(nb)
    e = sum(h[p, p] for p in occ_a) + sum(h[p, p] for p in occ_b)
    e += 0.5 * sum(g[p, p, q, q] for p in occ_a for q in occ_a)
    e += 0.5 * sum(g[p, p, q, q] for p in occ_b for q in occ_b)
    e -= 0.5 * sum(g[p, q, q, p] for p in occ_a for q in occ_a)
    e -= 0.5 * sum(g[p, q, q, p] for p in occ_b for q in occ_b)
    e += sum(g[p, p, q, q] for p in occ_a for q in occ_b)
    return e


def rotate(h, g, kvec, n):
    from scipy.linalg import expm
    kmat = np.zeros((n, n))
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            kmat[i, j] = kvec[idx]
            kmat[j, i] = -kvec[idx]
            idx += 1
    u = expm(-kmat)
    h2 = u.T @ h @ u
    g2 = np.einsum("ip,jq,ijkl,kr,ls->pqrs", u, u, g, u, u, optimize=True)
    return h2, g2


def hf_spectral_range(h, g, e_core, na, nb, seed=7):
    from scipy.optimize import minimize
    n = h.shape[0]
    nparam = n * (n - 1) // 2
    rng = np.random.default_rng(seed)

    def run(sign):
        best = None
        for trial in range(12):
            x0 = np.zeros(nparam) if trial == 0 else rng.normal(scale=0.7, size=nparam)
            res = minimize(
                lambda k: sign * hf_energy(*rotate(h, g, k, n)[:2], na, nb),
                x0, method="BFGS", options={"gtol": 1e-11, "maxiter": 2000})
            if best is None or res.fun < best:
                best = res.fun
        return best

    e_min = run(1.0) + e_core
    e_max = -run(-1.0) + e_core
    return e_min, e_max


# ---------------------------------------------------------------------------
# FCIDUMP emission
# ---------------------------------------------------------------------------

def write_fcidump(path, h, g, e_core, n_elec, ms2=0, thresh=1e-12):
    n = h.shape[0]
    lines = [
        f"&FCI NORB={n},NELEC={n_elec},MS2={ms2},",
        "  ORBSYM=" + "1," * n,
        "  ISYM=1,",
        "&END",
    ]
    seen = set()
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    key = _canon8(p, q, r, s)
                    if key in seen:
                        continue
                    seen.add(key)
                    if abs(g[p, q, r, s]) > thresh:
                        lines.append(f" {g[p, q, r, s]:23.16E} {p + 1:4d} {q + 1:4d} {r + 1:4d} {s + 1:4d}")
    for p in range(n):
        for q in range(p + 1):
            if abs(h[p, q]) > thresh:
                lines.append(f" {h[p, q]:23.16E} {p + 1:4d} {q + 1:4d}    0    0")
    lines.append(f" {e_core:23.16E}    0    0    0    0")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def _canon8(p, q, r, s):
    a = (p, q) if p >= q else (q, p)
    b = (r, s) if r >= s else (s, r)
    return max(a + b, b + a)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def make_fixture(name, atoms, basis, n_elec, geometry_note, do_hf_range=True):
    print(f"=== {name} ({basis}) ===")
    res = rhf(atoms, basis, n_elec)
    n = res["n_orb"]
    lam = one_norm(res["h"], res["g"])
    e_min, e_max = singlet_range(res["h"], res["g"], res["e_nuc"], n_elec)
    de = e_max - e_min
    print(f"  n_orb={n}  E_HF={res['e_hf']:.10f}  lambda={lam:.4f}")
    print(f"  sector (N={n_elec}, S=0): E_min={e_min:.8f} E_max={e_max:.8f} dE={de:.4f}")
    meta = {
        "name": name,
        "basis": basis,
        "geometry": geometry_note,
        "units": "angstrom",
        "n_orbitals": n,
        "n_alpha": n_elec // 2,
        "n_beta": n_elec // 2,
        "generator": "fixtures/generate.py (McMurchie-Davidson RHF + dense FCI)",
        "reference": {
            "hf_energy": res["e_hf"],
            "fci_singlet_ground": e_min,
            "fci_singlet_max": e_max,
            "singlet_spectral_range": de,
            "pauli_one_norm": lam,
        },
    }
    if do_hf_range:
        hf_min, hf_max = hf_spectral_range(res["h"], res["g"], res["e_nuc"],
                                           n_elec // 2, n_elec // 2)
        delta_shift = abs((hf_min + hf_max) - (e_min + e_max)) / abs(hf_min + hf_max)
        print(f"  HF-level range: [{hf_min:.8f}, {hf_max:.8f}] dE_HF={hf_max - hf_min:.4f} "
              f"delta_shift={delta_shift:.3e}")
        meta["reference"]["hf_level_min"] = hf_min
        meta["reference"]["hf_level_max"] = hf_max
        meta["reference"]["hf_level_range"] = hf_max - hf_min
        meta["reference"]["shift_error"] = delta_shift

    here = os.path.dirname(os.path.abspath(__file__))
    write_fcidump(os.path.join(here, f"{name}.fcidump"),
                  res["h"], res["g"], res["e_nuc"], n_elec)
    with open(os.path.join(here, f"{name}.json"), "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")


def main():
    r_h2 = 0.74  # angstrom
    h2 = lambda r: [("H", (0.0, 0.0, 0.0)),
                    ("H", (0.0, 0.0, r * ANGSTROM_TO_BOHR))]
    make_fixture("h2_sto3g", h2(r_h2), "sto-3g", 2,
                 f"H 0 0 0; H 0 0 {r_h2}")
    make_fixture("h2_631g", h2(r_h2), "6-31g", 2,
                 f"H 0 0 0; H 0 0 {r_h2}")
    r_lih = 1.5949
    lih = [("Li", (0.0, 0.0, 0.0)),
           ("H", (0.0, 0.0, r_lih * ANGSTROM_TO_BOHR))]
    make_fixture("lih_sto3g", lih, "sto-3g", 4,
                 f"Li 0 0 0; H 0 0 {r_lih}", do_hf_range=False)


if __name__ == "__main__":
    main()
