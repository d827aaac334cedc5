"""Recompute the frozen constants in ``fockriesz.golden`` with mpmath.

Independent of the package numerics: moments come from mpmath.quad on the
radial integral, kernel norms from direct high-precision series, and Gram
eigenvalues from mpmath.eigsy. Run with ``python3 tools/golden_oracle.py``.
"""

import mpmath as mp

mp.mp.dps = 40


def log_moment(n, beta):
    """log of 2 pi int_0^inf r^(2n+1) e^(-2 phi(r)) dr."""
    beta = mp.mpf(beta)
    a = 2 * n + 2
    t_star = (mp.mpf(n + 1) / (1 + beta)) ** (1 / beta)
    f = lambda t: mp.exp(a * t - 2 * t ** (1 + beta))
    width = t_star ** ((1 - beta) / 2) + 1
    pts = [0, t_star / 2, max(t_star - 8 * width, t_star / 2 + 1e-3), t_star,
           t_star + 8 * width, t_star + 40 * width, 2 * t_star + 80 * width + 40, mp.inf]
    pts = sorted(set(pts))
    radial = mp.quad(f, pts)
    return mp.log(2 * mp.pi) + mp.log(mp.mpf(1) / a + radial)


def lam(n, beta):
    return ((mp.mpf(1) + n) / (1 + mp.mpf(beta))) ** (1 / mp.mpf(beta))


def sig(n, beta):
    return ((mp.mpf(n) + mp.mpf(1) / 2) / (1 + mp.mpf(beta))) ** (1 / mp.mpf(beta))


def moments(beta, n_max):
    return [log_moment(n, beta) for n in range(n_max + 1)]


def kernel_log(s, w):
    return mp.log(mp.fsum(mp.exp(2 * n * s - w[n]) for n in range(len(w))))


def cross(s1, s2, w):
    return mp.fsum(mp.exp(n * (s1 + s2) - w[n]) for n in range(len(w)))


def estimate_log(s, beta):
    """logaddexp of the |z| rho and rho^2 branches with constants set to 1."""
    beta = mp.mpf(beta)
    log_rho = s + (1 - beta) / 2 * mp.log(s)
    nz = int(mp.floor((1 + beta) * s ** beta + mp.mpf("1e-9")))
    g = lambda t: s * t - beta * (t / (1 + beta)) ** ((1 + beta) / beta)
    phi_t = max(g(mp.mpf(nz)), g(mp.mpf(nz + 1)))
    a = 2 * phi_t - s - log_rho
    b = 2 * s ** (1 + beta) - 2 * log_rho
    return mp.log(mp.exp(a) + mp.exp(b))


def envelope_width(beta, count=100, n_max=140):
    w = moments(beta, n_max)
    u40 = lam(40, beta)
    diffs = []
    for i in range(count):
        s = 1 + (u40 - 1) * mp.mpf(i) / (count - 1)
        terms = [2 * n * s - w[n] for n in range(n_max + 1)]
        assert terms[-1] < max(terms) - 100, "moment table too short"
        diffs.append(kernel_log(s, w) - estimate_log(s, beta))
    return max(diffs) - min(diffs)


def envelope_band(beta, seed, count=200, n_points=80, M=31):
    """sup - inf of log|G| - phi - log dist + 1.5 log(1 + |z|) on the seeded grid."""
    import numpy as np

    us = [lam(n, beta) for n in range(n_points)]
    s_max = float(us[30])
    rng = np.random.default_rng(seed)
    s = np.sort(rng.uniform(0.0, s_max, size=count))
    s[s == 0.0] = s_max / count
    angles = rng.uniform(-np.pi, np.pi, size=count)
    ex = []
    for si, ai in zip(s, angles):
        z = mp.exp(mp.mpf(float(si))) * mp.expj(mp.mpf(float(ai)))
        log_g = mp.fsum(mp.log(abs(1 - z / mp.exp(u))) for u in us[:M])
        dist = min(abs(z - mp.exp(u)) for u in us)
        ex.append(log_g - mp.mpf(float(si)) ** (1 + mp.mpf(beta)) - mp.log(dist)
                  + mp.mpf(3) / 2 * mp.log(1 + abs(z)))
    return max(ex) - min(ex)


def biorthogonal_norms(beta, M=40, n_top=10):
    """||g_n||^2 with g_n = ||k_(lambda_n)|| prod_(k != n) (1 - z/lambda_k)/(1 - lambda_n/lambda_k)."""
    w = moments(beta, M + 40)
    gam = [mp.exp(lam(k, beta)) for k in range(M)]
    out = []
    for n in range(n_top + 1):
        coef = [mp.mpf(1)]
        for k in range(M):
            if k == n:
                continue
            nxt = coef + [mp.mpf(0)]
            for j in range(1, len(nxt)):
                nxt[j] -= coef[j - 1] / gam[k]
            coef = nxt
        p_at = mp.fprod(1 - gam[n] / gam[k] for k in range(M) if k != n)
        norm2 = mp.fsum(c ** 2 * mp.exp(w[j]) for j, c in enumerate(coef))
        out.append(mp.exp(kernel_log(lam(n, beta), w)) * norm2 / p_at ** 2)
    return out


if __name__ == "__main__":
    w = moments(0.5, 80)
    print("moment_log_beta0.5_n0", mp.nstr(w[0], 20))
    print("kernel_diag_beta0.5_s2", mp.nstr(kernel_log(mp.mpf(2), w), 20))
    s2, s3 = lam(2, 0.5), lam(3, 0.5)
    val = cross(s2, s3, w) / mp.sqrt(mp.exp(kernel_log(s2, w) + kernel_log(s3, w)))
    print("kernel_offdiag_beta0.5_l2_l3", mp.nstr(val, 20))
    us = [lam(n, 0.5) for n in range(8)]
    G = mp.matrix(8, 8)
    L = [kernel_log(u, w) for u in us]
    for i in range(8):
        for j in range(8):
            G[i, j] = cross(us[i], us[j], w) / mp.exp((L[i] + L[j]) / 2)
    ev = mp.eigsy(G, eigvals_only=True)
    ev = sorted(ev[i] for i in range(8))
    print("gram_reference_M8_beta0.5", mp.nstr(ev[0], 20), mp.nstr(ev[-1], 20))
    for beta in (0.3, 0.5, 0.7):
        print("kernel_envelope_width", beta, mp.nstr(envelope_width(beta), 20))
    print("envelope_band_width", mp.nstr(envelope_band(0.5, 20240229), 20))
    print("biorthogonal_norms", [mp.nstr(v, 12) for v in biorthogonal_norms(0.5)])
    print("envelope_band_width M=62", mp.nstr(envelope_band(0.5, 20240229, M=62), 20))
