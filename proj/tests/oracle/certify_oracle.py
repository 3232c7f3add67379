#!/usr/bin/env python3
"""Independent arithmetic oracle for the certificate formulas.

Evaluates every closed-form constant, bound and threshold directly in
high-precision arithmetic (mpmath, 50 digits) on random parameter tuples and
writes the inputs together with the expected outputs to a golden JSON file.
The C++ implementation works in log-space and shares no code with this
script; the acceptance suite compares the two at 1e-12 relative tolerance.

Usage: certify_oracle.py [--out tests/data/certify_golden.json] [--seed N]
"""

import argparse
import json
import random

import mpmath as mp

mp.mp.dps = 50


def F(x):
    return mp.mpf(x)


# ---------------------------------------------------------------- helpers


def cp(p):
    p = F(p)
    return (p ** (p + 1) / (2 * (p - 1) ** (p - 1))) ** (p / 2)


def odd_double_factorial(p):
    # (2p-1)!! = 2^p Gamma(p + 1/2) / sqrt(pi)
    p = F(p)
    return 2 ** p * mp.gamma(p + F(1) / 2) / mp.sqrt(mp.pi)


def g_function(a, lo, hi):
    a, lo, hi = F(a), F(lo), F(hi)
    return (hi ** 2 * max(a, 0) - lo ** 2 * max(-a, 0)) / 2


def growth_a(p, Lh, sh):
    return F(Lh) + F(sh) ** 2 * F(p) * F(Lh)


def growth_b(p, Lh, sh, tau):
    return 1 + F(Lh) * F(tau) + F(sh) ** 2 * F(p) * F(Lh) * F(tau)


def alpha_sdde(p, Lh, sh):
    p, Lh, s2 = F(p), F(Lh), F(sh) ** 2
    return (p + 3 * p * Lh - 2 * Lh + s2 * (p + 2 * p ** 2 * Lh - p * Lh)) / 2


def alpha_sde(p, Lh, sh):
    p, Lh, s2 = F(p), F(Lh), F(sh) ** 2
    return (p + 3 * p * Lh - 2 * Lh + s2 * p * (1 - 2 * Lh + 3 * p * Lh)) / 2


def beta(p, Lh, sh):
    p, Lh, s2 = F(p), F(Lh), F(sh) ** 2
    return (p + 2 * p * Lh + s2 * (p + p ** 2 * Lh + p * Lh)) / 2


def rho_xy(p, L, sh):
    p, L, s2 = F(p), F(L), F(sh) ** 2
    return (p + 5 * p * L - 4 * L + s2 * (p + 5 * p ** 2 * L - 4 * p * L)) / 2


def rho_yY(p, L, sh):
    p, L, s2 = F(p), F(L), F(sh) ** 2
    return 4 * p * L - 4 * L + p / 2 + s2 * (p / 2 + 4 * p ** 2 * L - 4 * p * L)


def rho_xX(p, L, sh):
    p, L, s2 = F(p), F(L), F(sh) ** 2
    return (p + 8 * p * L - 8 * L + s2 * (p + 8 * p ** 2 * L - 8 * p * L)) / 2


def bracket_q(p, sh, tau):
    p, sh, tau = F(p), F(sh), F(tau)
    return tau ** (p / 2) + sh ** (2 * p) * tau ** (p / 2) + cp(p) * sh ** p


def lip_factor(p, L, sh):
    return F(L) + F(sh) ** 2 * F(p) * F(L)


# ---------------------------------------------------------------- lemmas


def lemma_bound_sdde(p, Lh, sh, tau, seg, span):
    return ((growth_a(p, Lh, sh) * F(span) + growth_b(p, Lh, sh, tau) * F(seg))
            * mp.exp(alpha_sdde(p, Lh, sh) * F(span)))


def lemma_bound_sde(p, Lh, sh, init, span):
    return ((F(init) + growth_a(p, Lh, sh) * F(span))
            * mp.exp(alpha_sde(p, Lh, sh) * F(span)))


def k1(p, Lh, sh, tau):
    p_ = F(p)
    return (F(3) ** (3 * p_ / 2 - 1) * F(Lh) ** (p_ / 2)
            * growth_b(p, Lh, sh, tau) * bracket_q(p, sh, tau))


def n1(p, Lh, sh, tau, span):
    p_ = F(p)
    return (F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2)
            * (1 + 2 * growth_a(p, Lh, sh) * F(span) * mp.exp(beta(p, Lh, sh) * F(span)))
            * bracket_q(p, sh, tau))


def k2(p, Lh, sh, tau):
    p_ = F(p)
    return 2 ** (p_ - 1) * (1 + growth_b(p, Lh, sh, tau) * mp.exp(alpha_sdde(p, Lh, sh) * F(tau)))


def n2(p, Lh, sh, tau):
    p_ = F(p)
    return (2 ** (p_ - 1) * F(tau) * growth_a(p, Lh, sh)
            * mp.exp(alpha_sdde(p, Lh, sh) * F(tau)))


def d1_const(p, Lh, sh, tau):
    p_, sh_, tau_ = F(p), F(sh), F(tau)
    return (F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2)
            * (tau_ ** (p_ / 2) + sh_ ** (2 * p_) * tau_ ** (p_ / 2)
               + sh_ ** p_ * mp.sqrt(odd_double_factorial(p))))


def d7_const(p, Lh, sh, tau, step, span, seg, strict):
    p_ = F(p)
    v = (F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2) * bracket_q(p, sh, tau)
         * (1 + 2 * (growth_a(p, Lh, sh) * F(span) + growth_b(p, Lh, sh, tau) * F(seg))
            * mp.exp(alpha_sdde(p, Lh, sh) * F(span))))
    if strict:
        v *= F(step) ** (p_ / 2)
    return v


def gap_xy(p, L, Lh, sh, tau, span, seg):
    p_, tau_, span_ = F(p), F(tau), F(span)
    inner = ((k2(p, Lh, sh, tau) * F(seg) + n2(p, Lh, sh, tau)) * tau_
             + tau_ ** (p_ / 2) * (k1(p, Lh, sh, tau) * F(seg) * mp.exp(beta(p, Lh, sh) * span_)
                                   + n1(p, Lh, sh, tau, span_) * span_))
    return 2 * lip_factor(p, L, sh) * inner * mp.exp(rho_xy(p, L, sh) * span_)


def gap_yY(p, L, Lh, sh, tau, step, span, init):
    p_, span_ = F(p), F(span)
    return (4 * d1_const(p, Lh, sh, tau) * lip_factor(p, L, sh) * F(step) ** (p_ / 2)
            * mp.exp(rho_yY(p, L, sh) * span_)
            * (span_ + 2 * (F(init) + growth_a(p, Lh, sh) * span_)
               * mp.exp(alpha_sde(p, Lh, sh) * span_)))


def gap_XY(p, L, Lh, sh, tau, span, seg):
    p_, tau_, span_ = F(p), F(tau), F(span)
    d5 = 2 * lip_factor(p, L, sh) * (
        tau_ ** (p_ / 2 - 1) * (k1(p, Lh, sh, tau) * F(seg) * mp.exp(beta(p, Lh, sh) * span_)
                                + n1(p, Lh, sh, tau, span_) * span_)
        + (k2(p, Lh, sh, tau) * F(seg) + n2(p, Lh, sh, tau)))
    return d5 * tau_ * mp.exp(rho_xy(p, L, sh) * span_)


def gap_xX(p, L, Lh, sh, tau, step, span, seg):
    p_, span_ = F(p), F(span)
    return (F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2) * 4 * lip_factor(p, L, sh)
            * bracket_q(p, sh, tau) * F(step) ** (p_ / 2)
            * (1 + 2 * (growth_a(p, Lh, sh) * span_ + growth_b(p, Lh, sh, tau) * F(seg))
               * mp.exp(alpha_sdde(p, Lh, sh) * span_))
            * mp.exp(rho_xX(p, L, sh) * span_))


# ---------------------------------------------------------------- stability transfers


def transfer_sdde_to_sde(p, L, Lh, sh, tau, delta, M, lam, d, ratio):
    p_, tau_, dl = F(p), F(tau), F(delta)
    T = mp.log(2 ** (p_ - 1) * F(M) / dl) / F(lam) + tau_
    w = 2 * T - tau_
    R = dl + 2 ** p_ * lip_factor(p, L, sh) * (
        k2(p, Lh, sh, tau) * tau_
        + k1(p, Lh, sh, tau) * tau_ ** (p_ / 2) * mp.exp(beta(p, Lh, sh) * w)
    ) * mp.exp(rho_xy(p, L, sh) * w)
    out = {"T": T, "threshold": R, "applicable": bool(R < 1)}
    d3 = (2 ** (p_ - 1) * F(d) + 2 ** p_ * lip_factor(p, L, sh)
          * (n2(p, Lh, sh, tau) * tau_ + n1(p, Lh, sh, tau, T) * tau_ ** (p_ / 2) * w)
          * mp.exp(rho_xy(p, L, sh) * w))
    out["d_internal"] = d3
    if R < 1:
        rate = -mp.log(R) / T
        out.update(rate=rate,
                   M_out=(2 ** (p_ - 1) * F(M) + 1) * F(ratio) * mp.exp(rate * T),
                   d_out=d3 / (1 - mp.exp(-rate * T)))
    return out


def transfer_sde_to_emsde(p, L, Lh, sh, tau, step, delta, M, lam, d):
    p_, tau_, h, dl = F(p), F(tau), F(step), F(delta)
    q = mp.log(2 ** (p_ - 1) * F(M) / dl) / (F(lam) * h)
    T = (mp.floor(q) + 1) * h
    L_, Lh_, s2 = F(L), F(Lh), F(sh) ** 2
    e1 = p_ + 4 * p_ * L_ - 8 * L_ + s2 * (p_ + 8 * p_ ** 2 * L_ - 8 * p_ * L_)
    e2 = p_ + 3 * p_ * Lh_ - 2 * Lh_ + s2 * (p_ - 2 * p_ * Lh_ + 3 * p_ ** 2 * Lh_)
    D1 = d1_const(p, Lh, sh, tau)
    U = dl + 2 ** (p_ + 2) * D1 * lip_factor(p, L, sh) * mp.exp(e1 * T) * mp.exp(e2 * T) * h ** (p_ / 2)
    out = {"T": T, "threshold": U, "applicable": bool(U < 1)}
    d4 = (2 ** (p_ - 1) * F(d)
          + 2 ** (p_ + 1) * D1 * T * tau_ ** (p_ / 2) * lip_factor(p, L, sh)
          * (1 + 2 * Lh_ + 2 * s2 * p_ * Lh_) * mp.exp(e1 * T) * mp.exp(e2 * T))
    out["d_internal"] = d4
    if U < 1:
        rate = -mp.log(U) / T
        out.update(rate=rate,
                   M_out=2 ** (p_ - 1) * F(M) * mp.exp(rate * T) + 1,
                   d_out=d4 / (1 - mp.exp(-rate * T)))
    return out


def transfer_emsde_to_emsdde(p, L, Lh, sh, tau, delta, M, lam, d):
    p_, tau_, dl = F(p), F(tau), F(delta)
    q = mp.log(2 ** (p_ - 1) * F(M) / dl) / (F(lam) * tau_)
    T = (mp.floor(q) + 2) * tau_
    V = dl + 2 ** p_ * lip_factor(p, L, sh) * (
        tau_ ** (p_ / 2) * k1(p, Lh, sh, tau) * mp.exp(2 * beta(p, Lh, sh) * T)
        + tau_ * k2(p, Lh, sh, tau)) * mp.exp(2 * rho_xy(p, L, sh) * T)
    out = {"T": T, "threshold": V, "applicable": bool(V < 1)}
    d6 = (2 ** (p_ - 1) * F(d) + 2 ** p_ * lip_factor(p, L, sh)
          * (2 * tau_ ** (p_ / 2) * T * n1(p, Lh, sh, tau, T) + tau_ * n2(p, Lh, sh, tau))
          * mp.exp(2 * rho_xy(p, L, sh) * T))
    out["d_internal"] = d6
    if V < 1:
        rate = -mp.log(V) / T
        out.update(rate=rate,
                   M_out=(2 ** (p_ - 1) * F(M) + 1) * mp.exp(rate * T),
                   d_out=d6 / (1 - mp.exp(-rate * T)))
    return out


def transfer_emsdde_to_sdde(p, L, Lh, sh, tau, step, delta, M, lam, d):
    p_, tau_, h, dl = F(p), F(tau), F(step), F(delta)
    q = mp.log(2 ** (p_ - 1) * F(M) / dl) / (F(lam) * tau_)
    T = (mp.floor(q) + 3) * tau_
    w = T - tau_
    a1 = alpha_sdde(p, Lh, sh)
    r3 = rho_xX(p, L, sh)
    pref = (2 ** (p_ + 2) * F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2) * lip_factor(p, L, sh)
            * bracket_q(p, sh, tau) * growth_b(p, Lh, sh, tau))
    W = dl + pref * mp.exp(2 * a1 * w) * mp.exp(2 * r3 * w) * h ** (p_ / 2)
    out = {"T": T, "threshold": W, "applicable": bool(W < 1)}
    d8 = (2 ** (p_ - 1) * F(d)
          + 2 ** (p_ + 1) * F(3) ** (3 * p_ / 2 - 2) * F(Lh) ** (p_ / 2) * lip_factor(p, L, sh)
          * bracket_q(p, sh, tau) * h ** (p_ / 2)
          * (1 + 4 * growth_a(p, Lh, sh) * w * mp.exp(2 * a1 * w))
          * mp.exp(2 * r3 * w))
    out["d_internal"] = d8
    if W < 1:
        rate = -mp.log(W) / T
        common = (1 + 2 ** (p_ - 1) * F(M)) * mp.exp((a1 + rate) * w)
        Lh_, s2 = F(Lh), F(sh) ** 2
        out.update(rate=rate,
                   M_out=common * growth_b(p, Lh, sh, tau),
                   d_out=common * (Lh_ * tau_ + s2 * p_ * Lh_ * tau_)
                   + d8 / (1 - mp.exp(-F(lam) * T)))
    return out


# ---------------------------------------------------------------- sampling


def u(rng, a, b):
    return rng.uniform(a, b)


def logu(rng, a, b):
    return 10 ** rng.uniform(a, b)


def common(rng, transfer=False):
    if transfer:
        p = u(rng, 2.0, 3.0)
        L = u(rng, 0.001, 0.2)
        c = u(rng, 0.0, 0.5)
        sh = u(rng, 0.0, 1.0)
    else:
        p = u(rng, 2.0, 4.0)
        L = u(rng, 0.01, 1.0)
        c = u(rng, 0.0, 1.0)
        sh = u(rng, 0.0, 1.5)
    Lh = 2.0 * max(L, c * c) * u(rng, 1.0, 1.5)
    return p, L, Lh, sh


def s(x):
    """Serialize an mpmath value as a double-precision float."""
    if isinstance(x, bool):
        return x
    return float(x)


def build(seed, count):
    rng = random.Random(seed)
    cases = {k: [] for k in [
        "g_function", "bdg_constant", "lemma_bound_sdde", "lemma_bound_sde",
        "delay_diff_constants", "em_onestep_constant_sde", "em_onestep_constant_sdde",
        "gap_bound_x_y", "gap_bound_y_Y", "gap_bound_X_Y", "gap_bound_x_X",
        "transfer_sdde_to_sde", "transfer_sde_to_emsde",
        "transfer_emsde_to_emsdde", "transfer_emsdde_to_sdde"]}

    for _ in range(count):
        a = u(rng, -5, 5)
        lo = u(rng, 0, 2)
        hi = lo + u(rng, 0, 2)
        cases["g_function"].append({"in": {"a": a, "sigma_lo": lo, "sigma_hi": hi},
                                    "out": {"value": s(g_function(a, lo, hi))}})

        p = u(rng, 2.0, 8.0)
        cases["bdg_constant"].append({"in": {"p": p}, "out": {"value": s(cp(p))}})

        p, L, Lh, sh = common(rng)
        tau, seg, span = u(rng, 1e-3, 1.0), u(rng, 0.0, 5.0), u(rng, 0.0, 2.0)
        cases["lemma_bound_sdde"].append({
            "in": {"p": p, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "seg_norm": seg, "span": span},
            "out": {"value": s(lemma_bound_sdde(p, Lh, sh, tau, seg, span))}})

        p, L, Lh, sh = common(rng)
        init, span = u(rng, 0.0, 5.0), u(rng, 0.0, 2.0)
        cases["lemma_bound_sde"].append({
            "in": {"p": p, "L_hat": Lh, "sigma_hi": sh, "init_moment": init, "span": span},
            "out": {"value": s(lemma_bound_sde(p, Lh, sh, init, span))}})

        p, L, Lh, sh = common(rng)
        tau, span = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0)
        cases["delay_diff_constants"].append({
            "in": {"p": p, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "span": span},
            "out": {"K1": s(k1(p, Lh, sh, tau)), "N1": s(n1(p, Lh, sh, tau, span)),
                    "K2": s(k2(p, Lh, sh, tau)), "N2": s(n2(p, Lh, sh, tau))}})

        p, L, Lh, sh = common(rng)
        tau = u(rng, 1e-3, 1.0)
        cases["em_onestep_constant_sde"].append({
            "in": {"p": p, "L_hat": Lh, "sigma_hi": sh, "tau": tau},
            "out": {"value": s(d1_const(p, Lh, sh, tau))}})

        p, L, Lh, sh = common(rng)
        tau, span, seg = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0), u(rng, 0.0, 5.0)
        step = tau / rng.randint(1, 64)
        cases["em_onestep_constant_sdde"].append({
            "in": {"p": p, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "step": step,
                   "span": span, "seg_norm": seg},
            "out": {"d7": s(d7_const(p, Lh, sh, tau, step, span, seg, False)),
                    "d7_strict": s(d7_const(p, Lh, sh, tau, step, span, seg, True))}})

        p, L, Lh, sh = common(rng)
        tau, span, seg = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0), u(rng, 0.0, 5.0)
        cases["gap_bound_x_y"].append({
            "in": {"p": p, "L": L, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "span": span,
                   "seg_norm": seg},
            "out": {"value": s(gap_xy(p, L, Lh, sh, tau, span, seg))}})

        p, L, Lh, sh = common(rng)
        tau, span, init = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0), u(rng, 0.0, 5.0)
        step = tau / rng.randint(1, 64)
        cases["gap_bound_y_Y"].append({
            "in": {"p": p, "L": L, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "step": step,
                   "span": span, "init_moment": init},
            "out": {"value": s(gap_yY(p, L, Lh, sh, tau, step, span, init))}})

        p, L, Lh, sh = common(rng)
        tau, span, seg = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0), u(rng, 0.0, 5.0)
        cases["gap_bound_X_Y"].append({
            "in": {"p": p, "L": L, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "span": span,
                   "seg_norm": seg},
            "out": {"value": s(gap_XY(p, L, Lh, sh, tau, span, seg))}})

        p, L, Lh, sh = common(rng)
        tau, span, seg = u(rng, 1e-3, 1.0), u(rng, 0.0, 2.0), u(rng, 0.0, 5.0)
        step = tau / rng.randint(1, 64)
        cases["gap_bound_x_X"].append({
            "in": {"p": p, "L": L, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "step": step,
                   "span": span, "seg_norm": seg},
            "out": {"value": s(gap_xX(p, L, Lh, sh, tau, step, span, seg))}})

        # Transfer pipelines: small parameter spans 1e-10..1e-1 so that both
        # applicable and inapplicable verdicts occur.
        for name in ["transfer_sdde_to_sde", "transfer_sde_to_emsde",
                     "transfer_emsde_to_emsdde", "transfer_emsdde_to_sdde"]:
            p, L, Lh, sh = common(rng, transfer=True)
            delta = u(rng, 0.1, 0.9)
            M, lam, d = u(rng, 1.0, 5.0), u(rng, 1.0, 5.0), u(rng, 0.0, 1.0)
            tau = logu(rng, -10, -1)
            step = tau / rng.randint(1, 16)
            inp = {"p": p, "L": L, "L_hat": Lh, "sigma_hi": sh, "tau": tau, "step": step,
                   "delta": delta, "M": M, "rate": lam, "d": d}
            if name == "transfer_sdde_to_sde":
                ratio = u(rng, 1.0, 3.0)
                inp["norm_ratio"] = ratio
                out = transfer_sdde_to_sde(p, L, Lh, sh, tau, delta, M, lam, d, ratio)
            elif name == "transfer_sde_to_emsde":
                out = transfer_sde_to_emsde(p, L, Lh, sh, tau, step, delta, M, lam, d)
            elif name == "transfer_emsde_to_emsdde":
                out = transfer_emsde_to_emsdde(p, L, Lh, sh, tau, delta, M, lam, d)
            else:
                out = transfer_emsdde_to_sdde(p, L, Lh, sh, tau, step, delta, M, lam, d)
            cases[name].append({"in": inp, "out": {k: s(v) for k, v in out.items()}})
    return cases


def pinned():
    """Fixed reports at p=2, M=3, rate=0.5, d=0, delta=0.5, L=L_hat=0.1,
    sigma_lo=sigma_hi=1, tau=step=1e-3."""
    base = dict(p=2.0, L=0.1, Lh=0.1, sh=1.0, tau=1e-3, delta=0.5, M=3.0, lam=0.5, d=0.0)
    b = base
    out = {
        "transfer_sdde_to_sde": transfer_sdde_to_sde(b["p"], b["L"], b["Lh"], b["sh"], b["tau"], b["delta"],
                                                     b["M"], b["lam"], b["d"], 1.0),
        "transfer_sde_to_emsde": transfer_sde_to_emsde(b["p"], b["L"], b["Lh"], b["sh"], b["tau"], b["tau"],
                                                       b["delta"], b["M"], b["lam"], b["d"]),
        "transfer_emsde_to_emsdde": transfer_emsde_to_emsdde(b["p"], b["L"], b["Lh"], b["sh"], b["tau"],
                                                             b["delta"], b["M"], b["lam"], b["d"]),
        "transfer_emsdde_to_sdde": transfer_emsdde_to_sdde(b["p"], b["L"], b["Lh"], b["sh"], b["tau"], b["tau"],
                                                           b["delta"], b["M"], b["lam"], b["d"]),
    }
    return {k: {kk: s(vv) for kk, vv in v.items()} for k, v in out.items()}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="tests/data/certify_golden.json")
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--count", type=int, default=60)
    args = ap.parse_args()
    cases = build(args.seed, args.count)
    with open(args.out, "w") as fh:
        json.dump({"seed": args.seed, "count": args.count, "cases": cases, "pinned": pinned()}, fh, indent=1)
    for k, v in cases.items():
        extra = ""
        if k.startswith("transfer"):
            extra = " applicable=%d" % sum(1 for c in v if c["out"]["applicable"])
        print("%-28s %d%s" % (k, len(v), extra))
    for k, v in pinned().items():
        print("pinned", k, v)


if __name__ == "__main__":
    main()
