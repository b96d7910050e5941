#!/usr/bin/env python3
"""High-precision oracle for frozen test values.

Evaluates the closed-form lineshape and response expressions with mpmath at
50 significant digits and prints the constants that are frozen into the Rust
test suite. Re-run after changing any unit conversion constant.

Usage: python3 tools/highprec_oracle.py
"""

import mpmath as mp

mp.mp.dps = 50

# Unit conventions: time fs, angular frequency rad/fs, hbar = 1.
C_CM_PER_FS = mp.mpf("2.99792458e-5")          # speed of light, cm/fs
KB_CM_PER_K = mp.mpf("0.6950348")              # Boltzmann constant, cm^-1/K
WAVENUM_TO_RADFS = 2 * mp.pi * C_CM_PER_FS     # cm^-1 -> rad/fs

# Overdamped-Brownian-oscillator reference parameters.
LAMBDA_CM = mp.mpf(100)      # reorganization energy, cm^-1
TAU_CORR = mp.mpf(100)       # correlation time, fs
TEMP_K = mp.mpf(300)         # temperature, K

LAM = LAMBDA_CM * WAVENUM_TO_RADFS                 # rad/fs
THETA = KB_CM_PER_K * TEMP_K * WAVENUM_TO_RADFS    # k_B T / hbar, rad/fs


def obo_g(t, lam=LAM, tau=TAU_CORR, theta=THETA):
    """g(t) = (lam*theta*tau^2 - i*lam*tau) * (exp(-t/tau) - 1 + t/tau)"""
    pref = lam * theta * tau**2 - 1j * lam * tau
    return pref * (mp.e**(-t / tau) - 1 + t / tau)


def obo_gdot(t, lam=LAM, tau=TAU_CORR, theta=THETA):
    """gdot(t) = (lam*theta*tau - i*lam) * (1 - exp(-t/tau))"""
    return (lam * theta * tau - 1j * lam) * (1 - mp.e**(-t / tau))


def obo_egcf(t, lam=LAM, tau=TAU_CORR, theta=THETA):
    """C(t) = (lam*theta - i*lam/tau) * exp(-t/tau)"""
    return (lam * theta - 1j * lam / tau) * mp.e**(-t / tau)


def r2_exact(t, T, tau, omega_j=0, omega_i=0, d4=1):
    """Exact rephasing response for shared-bath levels (g_ij == g here)."""
    g = obo_g
    phase = -1j * (omega_j * t + (omega_j - omega_i) * T - omega_i * tau)
    expo = (
        phase
        - mp.conj(g(tau + T))
        - g(T + t)
        + mp.conj(g(t + T + tau))
        - mp.conj(g(t))
        - mp.conj(g(tau))
        + g(T)
    )
    return d4 * mp.e**expo


def r2_rdm(t, tau, omega=0, d4=1):
    """Ground-state-projector response: exp(-i*omega*(t-tau) - g*(tau) - g(t))."""
    expo = -1j * omega * (t - tau) - mp.conj(obo_g(tau)) - obo_g(t)
    return d4 * mp.e**expo


def fmt(label, z):
    z = mp.mpc(z)
    print(f"{label}:")
    print(f"  re = {mp.nstr(z.real, 20)}")
    print(f"  im = {mp.nstr(z.imag, 20)}")


print("# conversion constants")
print(f"WAVENUM_TO_RADFS = {mp.nstr(WAVENUM_TO_RADFS, 20)}")
print(f"lambda [rad/fs]  = {mp.nstr(LAM, 20)}")
print(f"theta  [rad/fs]  = {mp.nstr(THETA, 20)}")
print()

print("# bath module")
fmt("obo_g(t=100)", obo_g(100))
fmt("obo_gdot(t=100)", obo_gdot(100))
fmt("obo_gdot(t -> inf)", LAM * THETA * TAU_CORR - 1j * LAM)
fmt("egcf(t=0)", obo_egcf(0))
fmt("egcf(t=500)", obo_egcf(500))
print()

print("# cumulant module")
omega_10000 = mp.mpf(10000) * WAVENUM_TO_RADFS
fmt("linear_coherence(omega=10000cm-1, t=200)",
    mp.e**(-1j * omega_10000 * 200 - obo_g(200)))
fmt("r2_exact(t=100, T=0, tau=100, rotframe)", r2_exact(100, 0, 100))
fmt("r2_rdm(t=100, tau=100, rotframe)", r2_rdm(100, 100))
fmt("r2_initial(tau=50, T=100, rotframe)", r2_exact(0, 100, 50))
print()

print("# propagator module")
# K3, i == j: -gdot*(t) + gdot*(t+T+tau) - gdot(t+T)
fmt("k3(t=100, T=100, tau=100)",
    -mp.conj(obo_gdot(100)) + mp.conj(obo_gdot(300)) - obo_gdot(200))
# K2, i != j, c_ij = 0, both levels on the same base bath:
#   -gdot*_ii(T+tau) - gdot_jj(T)
fmt("k2(T=100, tau=100, c_ij=0)",
    -mp.conj(obo_gdot(200)) - obo_gdot(100))
# I coefficient at t=0: gdot(T) - gdot*(T+tau)
fmt("coeff_i(t=0, T=100, tau=50)", obo_gdot(100) - mp.conj(obo_gdot(150)))
fmt("coeff_m(t=100)", obo_gdot(100))
